import { describe, expect, it } from "vitest";

import { ApiError, DmsClient } from "../src/api.js";
import {
  applyApiError,
  applyValidationFailure,
  canSubmit,
  draftFromValues,
  emptyForm,
  formFromRecord,
  setValue,
  submitForm,
} from "../src/forms.js";

const VALIDATION_422 = {
  accepted: false,
  violations: [
    { field: "reg_no", code: "E_FORMAT", message: "reg_no must match YYYY/DEPT/NNN" },
    { field: "full_name", code: "E_REQUIRED", message: "full_name is required" },
    { field: "intake_year", code: "E_RANGE", message: "intake_year must be >= 1950" },
  ],
};

describe("form state machine", () => {
  it("maps every server violation to a visible per-field message", () => {
    const state = applyValidationFailure(emptyForm("students"), VALIDATION_422);
    for (const violation of VALIDATION_422.violations) {
      expect(state.fieldErrors[violation.field]).toContain(violation.message);
      expect(state.fieldErrors[violation.field]).toContain(violation.code);
    }
    expect(state.formError).toBeNull();
  });

  it("routes violations on unknown fields to the form-level message", () => {
    const state = applyValidationFailure(emptyForm("students"), {
      accepted: false,
      violations: [{ field: "", code: "E_FORMAT", message: "row malformed" }],
    });
    expect(state.formError).toContain("row malformed");
  });

  it("never gates on client-side checks: empty form is submittable", () => {
    const state = emptyForm("students");
    expect(state.values.full_name).toBe("");
    expect(canSubmit(state)).toBe(true);
  });

  it("blocks submit only while a request is in flight", () => {
    const state = { ...emptyForm("students"), inFlight: true };
    expect(canSubmit(state)).toBe(false);
  });

  it("clears a field's error when the operator edits it", () => {
    let state = applyValidationFailure(emptyForm("students"), VALIDATION_422);
    state = setValue(state, "full_name", "A. Silva");
    expect(state.fieldErrors.full_name).toBe("");
    expect(state.fieldErrors.reg_no).toContain("E_FORMAT");
  });

  it("shows duplicate conflicts as a form-level message", () => {
    const state = applyApiError(
      emptyForm("students"),
      new ApiError(409, "E_DUPLICATE", "students key '2014/PS/001' already exists"),
    );
    expect(state.formError).toContain("E_DUPLICATE");
    expect(state.needsAuth).toBe(false);
  });

  it("asks for re-authentication on 401 and 403", () => {
    for (const status of [401, 403]) {
      const state = applyApiError(
        emptyForm("students"),
        new ApiError(status, "FORBIDDEN", "role lacks the 'write' action"),
      );
      expect(state.needsAuth).toBe(true);
    }
  });

  it("builds update forms from stored records, stringified", () => {
    const state = formFromRecord("students", {
      reg_no: "2014/PS/001",
      full_name: "A. Silva",
      program: "PS",
      intake_year: 2014,
      email: "a@uni.lk",
      phone: "071",
      status: "active",
    });
    expect(state.mode).toBe("update");
    expect(state.values.intake_year).toBe("2014");
    expect(draftFromValues(state).reg_no).toBe("2014/PS/001");
  });
});

function stubClient(behavior: (draft: Record<string, unknown>) => Promise<never> | Promise<unknown>) {
  return {
    create: (_kind: string, draft: Record<string, unknown>) => behavior(draft),
  } as unknown as DmsClient;
}

describe("submit round trip", () => {
  it("disables during flight and resets on success", async () => {
    const seen: boolean[] = [];
    const client = stubClient(async () => ({ record: { reg_no: "2014/PS/001" }, version: 1 }));
    let state = emptyForm("students");
    state = setValue(state, "full_name", "A. Silva");
    const settled = await submitForm(client, state, (s) => seen.push(s.inFlight));
    expect(seen).toEqual([true, false]);
    expect(settled.saved?.version).toBe(1);
    expect(settled.values.full_name).toBe(""); // fresh form after save
  });

  it("lands 422 responses beside the offending fields", async () => {
    const client = stubClient(async () => {
      throw new ApiError(422, "E_VALIDATION", "validation failed", VALIDATION_422);
    });
    const settled = await submitForm(client, emptyForm("students"));
    expect(Object.keys(settled.fieldErrors).sort()).toEqual([
      "full_name",
      "intake_year",
      "reg_no",
    ]);
    expect(settled.saved).toBeNull();
    expect(settled.inFlight).toBe(false);
  });

  it("reports network failures as a banner, not a crash", async () => {
    const client = stubClient(async () => {
      throw new TypeError("fetch failed");
    });
    const settled = await submitForm(client, emptyForm("students"));
    expect(settled.formError).toContain("network failure");
  });
});
