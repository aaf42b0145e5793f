import { describe, expect, it } from "vitest";

import type { StatsReport } from "../src/api.js";
import { correlationCellText, correlationTable, summaryRows } from "../src/stats.js";

const report: StatsReport = {
  unit: "per_song_mean",
  summaries: [
    {
      question: "like",
      count: 3,
      histogram: [0, 1, 0, 1, 1],
      mean: 3.6667,
      stddev: 1.2472,
    },
    { question: "happy", count: 0, histogram: [0, 0, 0, 0, 0], mean: null, stddev: null },
  ],
  correlations: [
    [
      { question_a: "like", question_b: "like", r: 1, p: null, n: 3, stars: ".", note: null },
      { question_a: "like", question_b: "happy", r: 0.754, p: 0.0004, n: 3, stars: "***", note: null },
    ],
    [
      { question_a: "happy", question_b: "like", r: 0.754, p: 0.0004, n: 3, stars: "***", note: null },
      { question_a: "happy", question_b: "happy", r: null, p: null, n: 0, stars: ".", note: "insufficient_n" },
    ],
  ],
  question_tests: [],
};

describe("summaryRows", () => {
  it("formats counts and replaces missing moments with a dash", () => {
    const rows = summaryRows(report);
    expect(rows[0]).toEqual({
      question: "like",
      count: 3,
      mean: "3.67",
      stddev: "1.25",
      histogram: "0 / 1 / 0 / 1 / 1",
    });
    expect(rows[1].mean).toBe("—");
  });
});

describe("correlation formatting", () => {
  it("renders r with significance stars and collapses the diagonal", () => {
    expect(correlationCellText(0.754, "***", false)).toBe("0.75***");
    expect(correlationCellText(0.3, ".", false)).toBe("0.30");
    expect(correlationCellText(null, ".", false)).toBe("n/a");
    expect(correlationCellText(1, ".", true)).toBe("–");
  });

  it("builds a square table aligned with the summaries", () => {
    const table = correlationTable(report);
    expect(table.questions).toEqual(["like", "happy"]);
    expect(table.cells).toEqual([
      ["–", "0.75***"],
      ["0.75***", "–"],
    ]);
  });
});
