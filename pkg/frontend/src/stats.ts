/** Pure formatting helpers for the read-only stats view. */

import type { StatsReport } from "./api.js";

export interface SummaryRow {
  question: string;
  count: number;
  mean: string;
  stddev: string;
  histogram: string;
}

export function summaryRows(report: StatsReport): SummaryRow[] {
  return report.summaries.map((s) => ({
    question: s.question,
    count: s.count,
    mean: s.mean === null ? "—" : s.mean.toFixed(2),
    stddev: s.stddev === null ? "—" : s.stddev.toFixed(2),
    histogram: s.histogram.join(" / "),
  }));
}

/** "r=0.75***" style cell text; diagonal and unavailable cells collapse. */
export function correlationCellText(
  r: number | null,
  stars: string,
  isDiagonal: boolean,
): string {
  if (isDiagonal) return "–";
  if (r === null) return "n/a";
  return r.toFixed(2) + (stars === "." ? "" : stars);
}

export interface CorrelationTable {
  questions: string[];
  cells: string[][];
}

export function correlationTable(report: StatsReport): CorrelationTable {
  const questions = report.summaries.map((s) => s.question);
  const cells = report.correlations.map((row, i) =>
    row.map((cell, j) => correlationCellText(cell.r, cell.stars, i === j)),
  );
  return { questions, cells };
}
