// Field descriptors for the three record kinds, mirroring the documented
// CSV schemas.  Required flags and pattern hints are advisory labels for the
// operator; the server is the only validator.

export type Kind = "students" | "staff" | "inventory";

export const KINDS: Kind[] = ["students", "staff", "inventory"];

export const KIND_LABELS: Record<Kind, string> = {
  students: "Students",
  staff: "Staff",
  inventory: "Inventory",
};

export interface FieldDescriptor {
  name: string;
  label: string;
  required: boolean;
  hint?: string;
  options?: string[];
  numeric?: boolean;
}

export const KEY_FIELD: Record<Kind, string> = {
  students: "reg_no",
  staff: "employee_id",
  inventory: "asset_id",
};

export const FORM_FIELDS: Record<Kind, FieldDescriptor[]> = {
  students: [
    { name: "reg_no", label: "Registration no", required: true, hint: "YYYY/DEPT/NNN, e.g. 2014/PS/001" },
    { name: "full_name", label: "Full name", required: true },
    { name: "program", label: "Program", required: false, hint: "program code, e.g. PS" },
    { name: "intake_year", label: "Intake year", required: true, numeric: true, hint: "1950 – next year" },
    { name: "email", label: "Email", required: false },
    { name: "phone", label: "Phone", required: false },
    { name: "status", label: "Status", required: true, options: ["active", "graduated", "suspended", "archived"] },
  ],
  staff: [
    { name: "employee_id", label: "Employee id", required: true },
    { name: "full_name", label: "Full name", required: true },
    { name: "designation", label: "Designation", required: false },
    { name: "category", label: "Category", required: true, options: ["academic", "non_academic"] },
    { name: "email", label: "Email", required: false },
    { name: "phone", label: "Phone", required: false },
    { name: "status", label: "Status", required: true, options: ["active", "on_leave", "left", "archived"] },
  ],
  inventory: [
    { name: "asset_id", label: "Asset id", required: true },
    { name: "kind", label: "Kind", required: true, options: ["book", "equipment", "consumable"] },
    { name: "title", label: "Title", required: false },
    { name: "quantity", label: "Quantity", required: true, numeric: true, hint: "0 or more" },
    { name: "location", label: "Location", required: false },
    { name: "condition", label: "Condition", required: true, options: ["available", "issued", "damaged", "written_off"] },
    { name: "issued_to", label: "Issued to", required: false, hint: "employee id, only when issued" },
  ],
};

export function fieldNames(kind: Kind): string[] {
  return FORM_FIELDS[kind].map((f) => f.name);
}

export const REPORT_NAMES = ["enrollment_summary", "staff_roster", "inventory_status"] as const;
export type ReportName = (typeof REPORT_NAMES)[number];
