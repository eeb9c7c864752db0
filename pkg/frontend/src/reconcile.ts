/** Dual-coder score reconciliation, mirrored from the server so the UI can
 * preview the outcome before the second submission lands. */

export type Label = "CSP" | "NonCSP" | "Unknown" | "Pending";

export type Score = 1 | 2 | 3 | 4 | 5;

export function isScore(value: number): value is Score {
  return Number.isInteger(value) && value >= 1 && value <= 5;
}

export function reconcile(a: number | null, b: number | null): Label {
  if (a === null || b === null) {
    return "Pending";
  }
  if (!isScore(a) || !isScore(b)) {
    throw new Error(`score must be 1..5, got ${a}, ${b}`);
  }
  const lo = Math.min(a, b);
  const hi = Math.max(a, b);
  if (lo >= 4) {
    return "CSP";
  }
  if (hi <= 2) {
    return "NonCSP";
  }
  return "Unknown";
}
