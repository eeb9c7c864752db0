/** Feature table rendering: raw value next to robust-normalized value, with
 * the most discriminative indicators pinned to the top. */

export const PINNED_FEATURES: readonly string[] = [
  "pct_holding_6420",
  "pct_companies_top_office_address",
  "log_n_companies",
  "pct_foreign_owner",
  "pct_owner_in_ofc",
  "name_contains_corporate_keyword",
  "pct_companies_previous_licensed_csp",
  "n_shared_directors_between_companies",
];

export interface FeatureRow {
  name: string;
  raw: number;
  robust: number;
  pinned: boolean;
}

export function featureRows(
  raw: Record<string, number>,
  robust: Record<string, number>,
): FeatureRow[] {
  const names = Object.keys(raw);
  const pinned = PINNED_FEATURES.filter((n) => n in raw);
  const rest = names.filter((n) => !PINNED_FEATURES.includes(n)).sort();
  return [...pinned, ...rest].map((name) => ({
    name,
    raw: raw[name],
    robust: robust[name] ?? 0,
    pinned: PINNED_FEATURES.includes(name),
  }));
}

function formatValue(value: number): string {
  if (Number.isInteger(value)) {
    return String(value);
  }
  return value.toFixed(3);
}

export function renderFeatureTable(
  raw: Record<string, number>,
  robust: Record<string, number>,
): string {
  const rows = featureRows(raw, robust)
    .map(
      (row) =>
        `<tr class="${row.pinned ? "pinned" : ""}">` +
        `<td>${row.name}</td>` +
        `<td class="num">${formatValue(row.raw)}</td>` +
        `<td class="num">${formatValue(row.robust)}</td></tr>`,
    )
    .join("");
  return (
    `<table class="features"><thead><tr>` +
    `<th>indicator</th><th>raw</th><th>robust</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}
