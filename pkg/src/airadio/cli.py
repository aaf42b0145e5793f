"""Command-line entry points: stats, simulate, serve."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path
from typing import Optional

import click

from .analytics import analytics_report
from .catalog import load_catalog
from .config import load_config, with_overrides
from .domain import ALL_QUESTIONS, Rating, RatingQuestion
from .sim import SimConfig, run_simulation, write_report_csv
from .store import RadioStore


def load_ratings_file(path: Path) -> list[Rating]:
    """Read ratings from a JSONL file: either an event log (rating_submitted
    events are folded into per-(listener, song) ratings) or one Rating object
    per line."""
    store = RadioStore()
    ratings: dict[str, Rating] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if "kind" in record:
                if record["kind"] != "rating_submitted":
                    continue
                payload = record["payload"]
                store._apply_rating(
                    payload["listener_id"],
                    payload["song_id"],
                    RatingQuestion(payload["question"]),
                    int(payload["stars"]),
                    int(payload["submitted_at"]),
                )
            else:
                rating = Rating.from_json(record)
                ratings[rating.rating_id] = rating
    return store.all_ratings() + list(ratings.values())


@click.group()
def main() -> None:
    """AI radio curation engine."""


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--unit", type=click.Choice(["per_song_mean", "per_rating"]), default="per_song_mean")
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None,
              help="Also write the correlation matrix as CSV.")
def stats(input_path: Path, unit: str, csv_path: Optional[Path]) -> None:
    """Compute rating summaries, correlations, and question tests."""
    ratings = load_ratings_file(input_path)
    report = analytics_report(ratings, unit)
    # Same serialization as the HTTP endpoint, so outputs are byte-comparable.
    sys.stdout.write(json.dumps(report, ensure_ascii=False, allow_nan=False,
                                separators=(",", ":")))
    sys.stdout.write("\n")
    if csv_path is not None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            names = [q.value for q in ALL_QUESTIONS]
            writer.writerow([""] + names)
            for name, row in zip(names, report["correlations"]):
                writer.writerow([name] + [cell["r"] for cell in row])


@main.command()
@click.option("--catalog", "catalog_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--epochs", type=int, default=20)
@click.option("--primes-per-epoch", type=int, default=5)
@click.option("--listeners", type=int, default=40)
@click.option("--ratings-per-song", type=int, default=5)
@click.option("--gamma", type=int, default=8)
@click.option("--M", "m", type=int, default=64)
@click.option("--noise-sd", type=float, default=0.0)
@click.option("--population", type=click.Choice(["linear", "quadratic"]), default="linear")
@click.option("--seed", type=int, default=7)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
def simulate(catalog_path, epochs, primes_per_epoch, listeners, ratings_per_song,
             gamma, m, noise_sd, population, seed, out_path) -> None:
    """Run the closed-loop listener simulation and report per-epoch metrics."""
    catalog = load_catalog(catalog_path)
    try:
        cfg = SimConfig(
            listeners=listeners,
            epochs=epochs,
            primes_per_epoch=primes_per_epoch,
            ratings_per_song=ratings_per_song,
            M=m,
            gamma=gamma,
            noise_sd=noise_sd,
            population=population,
            seed=seed,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    reports = run_simulation(catalog, cfg)
    if out_path is not None:
        write_report_csv(reports, out_path)
    else:
        click.echo(json.dumps([r.to_json() for r in reports], indent=2))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--catalog", "catalog_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
@click.option("--bind", default=None, help="host:port to listen on")
@click.option("--ui-dir", type=click.Path(path_type=Path), default=None)
@click.option("--admin-token", default=None)
def serve(config_path, catalog_path, data_dir, bind, ui_dir, admin_token) -> None:
    """Start the HTTP radio service with a background generation worker."""
    import uvicorn

    from .service import RadioService, WorkerLoop, create_app

    cfg = load_config(config_path)
    overrides = {}
    if catalog_path is not None:
        overrides["catalog_path"] = catalog_path
    if data_dir is not None:
        overrides["data_dir"] = data_dir
    if bind is not None:
        overrides["bind_addr"] = bind
    if ui_dir is not None:
        overrides["ui_dir"] = ui_dir
    if admin_token is not None:
        overrides["admin_token"] = admin_token
    if overrides:
        cfg = with_overrides(cfg, **overrides)
    service = RadioService(cfg)
    worker = WorkerLoop(service)
    worker.start()
    host, _, port = cfg.bind_addr.partition(":")
    try:
        uvicorn.run(create_app(service), host=host or "127.0.0.1", port=int(port or 8000))
    finally:
        worker.stop()


if __name__ == "__main__":
    main()
