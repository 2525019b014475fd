// Thin client over the HTTP API.  No business logic lives here: requests go
// out, typed documents or ApiError come back.

import type { Kind } from "./schema.js";

export interface Violation {
  field: string;
  code: string;
  message: string;
}

export interface ValidationDoc {
  accepted: boolean;
  violations: Violation[];
}

export interface RecordDoc {
  record: Record<string, unknown>;
  version: number;
}

export interface PageDoc {
  total_matches: number;
  offset: number;
  limit: number;
  records: RecordDoc[];
}

export interface ImportReportDoc {
  total_rows: number;
  accepted: number;
  rejected: { line_number: number; field: string; code: string }[];
  duration_s: number;
}

export interface HealthDoc {
  status: string;
  counts: Record<Kind, number>;
}

export class ApiError extends Error {
  status: number;
  code: string;
  validation: ValidationDoc | null;

  constructor(status: number, code: string, message: string, validation: ValidationDoc | null = null) {
    super(message);
    this.status = status;
    this.code = code;
    this.validation = validation;
  }
}

async function raiseFor(response: Response): Promise<never> {
  let code = `HTTP_${response.status}`;
  let message = response.statusText;
  let validation: ValidationDoc | null = null;
  try {
    const body = await response.json();
    if (body && body.accepted === false && Array.isArray(body.violations)) {
      validation = body as ValidationDoc;
      code = "E_VALIDATION";
      message = "validation failed";
    } else if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, code, message, validation);
}

export class DmsClient {
  constructor(
    public baseUrl: string,
    public token: string,
  ) {}

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    const headers = new Headers(init.headers);
    if (this.token) headers.set("X-DMS-Token", this.token);
    const response = await fetch(`${this.baseUrl}/api/v1${path}`, { ...init, headers });
    if (!response.ok) await raiseFor(response);
    return response;
  }

  async health(): Promise<HealthDoc> {
    return (await this.request("/health")).json();
  }

  async list(kind: Kind, offset = 0, limit = 20): Promise<PageDoc> {
    return (await this.request(`/${kind}?offset=${offset}&limit=${limit}`)).json();
  }

  // predicates are already wire-shaped pairs: ["program.eq", "CS"]
  async search(
    kind: Kind,
    predicates: [string, string][],
    offset = 0,
    limit = 20,
    includeArchived = false,
  ): Promise<PageDoc> {
    const params = new URLSearchParams(predicates);
    params.set("offset", String(offset));
    params.set("limit", String(limit));
    if (includeArchived) params.set("include_archived", "true");
    return (await this.request(`/${kind}/search?${params}`)).json();
  }

  async get(kind: Kind, key: string): Promise<RecordDoc> {
    return (await this.request(`/${kind}/${key}`)).json();
  }

  async create(kind: Kind, draft: Record<string, unknown>): Promise<RecordDoc> {
    return (
      await this.request(`/${kind}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(draft),
      })
    ).json();
  }

  async update(kind: Kind, key: string, draft: Record<string, unknown>): Promise<RecordDoc> {
    return (
      await this.request(`/${kind}/${key}`, {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(draft),
      })
    ).json();
  }

  async archive(kind: Kind, key: string): Promise<RecordDoc> {
    return (await this.request(`/${kind}/${key}`, { method: "DELETE" })).json();
  }

  async reportHtml(name: string): Promise<string> {
    return (await this.request(`/reports/${name}?format=html`)).text();
  }

  async reportCsv(name: string): Promise<Uint8Array<ArrayBuffer>> {
    const response = await this.request(`/reports/${name}?format=csv`);
    return new Uint8Array(await response.arrayBuffer());
  }

  async importCsv(kind: Kind, payload: string | Uint8Array<ArrayBuffer>): Promise<ImportReportDoc> {
    return (
      await this.request(`/import/${kind}`, {
        method: "POST",
        headers: { "Content-Type": "text/csv" },
        body: payload,
      })
    ).json();
  }

  // Capability probes, used only to decide which screens to show.  Both are
  // contract-safe: list is a plain read; an empty-body import aborts with
  // BAD_HEADER before anything is written, so for an admin it answers 400
  // while for anyone else authorization answers first.
  async canRead(): Promise<boolean> {
    try {
      await this.list("students", 0, 1);
      return true;
    } catch (err) {
      if (err instanceof ApiError && (err.status === 401 || err.status === 403)) return false;
      throw err;
    }
  }

  async canImport(): Promise<boolean> {
    try {
      await this.importCsv("students", "");
      return true; // unreachable: empty body always fails the header check
    } catch (err) {
      if (err instanceof ApiError && err.code === "BAD_HEADER") return true;
      if (err instanceof ApiError && (err.status === 401 || err.status === 403)) return false;
      throw err;
    }
  }
}
