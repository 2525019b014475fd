// Result-table view model: rows exactly as the API returned them, plus
// pagination arithmetic driven by total_matches.

import type { PageDoc } from "./api.js";
import { Kind, fieldNames } from "./schema.js";

export interface TableView {
  columns: string[];
  rows: string[][];
  versions: number[];
  keys: string[];
  empty: boolean;
}

export function tableFromPage(kind: Kind, page: PageDoc): TableView {
  const columns = fieldNames(kind);
  const rows = page.records.map((stored) =>
    columns.map((name) => {
      const value = stored.record[name];
      return value === undefined || value === null ? "" : String(value);
    }),
  );
  return {
    columns,
    rows,
    versions: page.records.map((r) => r.version),
    keys: page.records.map((r) => String(r.record[columns[0]])),
    empty: rows.length === 0,
  };
}

export interface Pager {
  offset: number;
  limit: number;
  total: number;
}

export function pagerFromPage(page: PageDoc): Pager {
  return { offset: page.offset, limit: page.limit, total: page.total_matches };
}

export function nextOffset(pager: Pager): number | null {
  const next = pager.offset + pager.limit;
  return next < pager.total ? next : null;
}

export function prevOffset(pager: Pager): number | null {
  if (pager.offset === 0) return null;
  return Math.max(0, pager.offset - pager.limit);
}

export function pageSummary(pager: Pager): string {
  if (pager.total === 0) return "no records";
  const from = pager.offset + 1;
  const to = Math.min(pager.offset + pager.limit, pager.total);
  return `${from}–${to} of ${pager.total}`;
}
