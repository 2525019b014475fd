// Entry-form state machine.  Every validation message shown next to a field
// comes from a server ValidationResult; the client never gates a submit on
// its own checks (required markers are hints only).

import { ApiError, DmsClient, RecordDoc, ValidationDoc } from "./api.js";
import { FORM_FIELDS, KEY_FIELD, Kind, fieldNames } from "./schema.js";

export interface FormState {
  kind: Kind;
  mode: "create" | "update";
  values: Record<string, string>;
  fieldErrors: Record<string, string>;
  formError: string | null;
  needsAuth: boolean;
  inFlight: boolean;
  saved: RecordDoc | null;
}

export function emptyForm(kind: Kind): FormState {
  const values: Record<string, string> = {};
  for (const field of FORM_FIELDS[kind]) {
    values[field.name] = field.options ? field.options[0] : "";
  }
  return {
    kind,
    mode: "create",
    values,
    fieldErrors: {},
    formError: null,
    needsAuth: false,
    inFlight: false,
    saved: null,
  };
}

export function formFromRecord(kind: Kind, record: Record<string, unknown>): FormState {
  const state = emptyForm(kind);
  state.mode = "update";
  for (const name of fieldNames(kind)) {
    const value = record[name];
    state.values[name] = value === undefined || value === null ? "" : String(value);
  }
  return state;
}

export function setValue(state: FormState, field: string, value: string): FormState {
  return {
    ...state,
    values: { ...state.values, [field]: value },
    fieldErrors: { ...state.fieldErrors, [field]: "" },
    saved: null,
  };
}

// The only gate: one request at a time.  Emptiness or format problems never
// block a submit; the server answers those.
export function canSubmit(state: FormState): boolean {
  return !state.inFlight;
}

export function applyValidationFailure(state: FormState, doc: ValidationDoc): FormState {
  const fieldErrors: Record<string, string> = {};
  const known = new Set(fieldNames(state.kind));
  let formError: string | null = null;
  for (const violation of doc.violations) {
    const text = `${violation.message} (${violation.code})`;
    if (known.has(violation.field)) {
      fieldErrors[violation.field] = fieldErrors[violation.field] ?? text;
    } else {
      formError = text;
    }
  }
  return { ...state, fieldErrors, formError, inFlight: false, saved: null };
}

export function applyApiError(state: FormState, err: ApiError): FormState {
  if (err.validation) return applyValidationFailure(state, err.validation);
  if (err.status === 401 || err.status === 403) {
    return { ...state, inFlight: false, needsAuth: true, formError: err.message };
  }
  // Form-level failures: duplicate key (409), key mismatch, server trouble.
  return { ...state, inFlight: false, formError: `${err.message} (${err.code})` };
}

export function draftFromValues(state: FormState): Record<string, string> {
  const draft: Record<string, string> = {};
  for (const name of fieldNames(state.kind)) {
    draft[name] = state.values[name] ?? "";
  }
  return draft;
}

// Runs one submit round-trip.  `onChange` sees the in-flight state first and
// the settled state afterwards, so the view can disable and re-enable the
// submit control.
export async function submitForm(
  client: DmsClient,
  state: FormState,
  onChange: (next: FormState) => void = () => {},
): Promise<FormState> {
  if (!canSubmit(state)) return state;
  const pending = { ...state, inFlight: true, formError: null, saved: null };
  onChange(pending);
  const draft = draftFromValues(pending);
  let settled: FormState;
  try {
    let saved: RecordDoc;
    if (pending.mode === "create") {
      saved = await client.create(pending.kind, draft);
    } else {
      const key = draft[KEY_FIELD[pending.kind]];
      saved = await client.update(pending.kind, key, draft);
    }
    settled = { ...emptyForm(pending.kind), saved };
  } catch (err) {
    if (err instanceof ApiError) {
      settled = applyApiError(pending, err);
    } else {
      settled = {
        ...pending,
        inFlight: false,
        formError: `network failure: ${err instanceof Error ? err.message : String(err)}`,
      };
    }
  }
  onChange(settled);
  return settled;
}
