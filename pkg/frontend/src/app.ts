// Browser wiring: hash routing, screens, and DOM rendering over the pure
// view models.  Every view reflects server responses only; nothing is shown
// optimistically.

import { ApiError, DmsClient, PageDoc } from "./api.js";
import {
  FormState,
  canSubmit,
  emptyForm,
  formFromRecord,
  setValue,
  submitForm,
} from "./forms.js";
import { FORM_FIELDS, KIND_LABELS, KINDS, Kind, REPORT_NAMES } from "./schema.js";
import { nextOffset, pageSummary, pagerFromPage, prevOffset, tableFromPage } from "./table.js";

const TOKEN_KEY = "dms-token";

interface Session {
  client: DmsClient;
  canRead: boolean;
  canWrite: boolean; // admin: forms + import
}

let session: Session | null = null;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  node.append(...children);
  return node;
}

function banner(kind: "error" | "ok" | "info", text: string): HTMLElement {
  return el("div", { class: `banner ${kind}` }, text);
}

async function startSession(): Promise<Session> {
  const token = localStorage.getItem(TOKEN_KEY) ?? "";
  const client = new DmsClient("", token);
  let canRead = false;
  let canWrite = false;
  if (token) {
    try {
      canRead = await client.canRead();
      canWrite = await client.canImport();
    } catch {
      // service unreachable; screens will surface the failure
    }
  }
  return { client, canRead, canWrite };
}

function navBar(active: string): HTMLElement {
  const links: [string, string][] = [];
  if (session?.canRead) for (const kind of KINDS) links.push([`#/${kind}`, KIND_LABELS[kind]]);
  links.push(["#/reports", "Reports"]);
  if (session?.canWrite) links.push(["#/import", "Import"]);
  links.push(["#/settings", "Settings"]);
  const nav = el("nav", {});
  for (const [href, label] of links) {
    const a = el("a", { href }, label);
    if (href === `#${active}`) a.classList.add("active");
    nav.append(a);
  }
  return nav;
}

function render(route: string, body: HTMLElement) {
  const app = document.getElementById("app")!;
  app.replaceChildren(navBar(route), body);
}

// ---- record screens -------------------------------------------------------

interface ListState {
  kind: Kind;
  predicates: [string, string][];
  offset: number;
  limit: number;
  includeArchived: boolean;
}

async function recordScreen(state: ListState) {
  if (!session?.canRead) {
    render(`/${state.kind}`, banner("info", "This token cannot read records."));
    return;
  }
  const client = session.client;
  const body = el("div", {});
  const controls = searchControls(state);
  body.append(el("h1", {}, KIND_LABELS[state.kind]), controls);

  let page: PageDoc;
  try {
    page = await client.search(
      state.kind,
      state.predicates,
      state.offset,
      state.limit,
      state.includeArchived,
    );
  } catch (err) {
    body.append(banner("error", err instanceof Error ? err.message : String(err)));
    render(`/${state.kind}`, body);
    return;
  }

  const view = tableFromPage(state.kind, page);
  if (view.empty) {
    body.append(banner("info", "no records"));
  } else {
    const table = el("table", { class: "records" });
    table.append(
      el("thead", {}, el("tr", {}, ...view.columns.map((c) => el("th", {}, c)), el("th", {}, ""))),
    );
    const tbody = el("tbody", {});
    view.rows.forEach((row, i) => {
      const tr = el("tr", {}, ...row.map((cell) => el("td", {}, cell)));
      if (session?.canWrite) {
        const edit = el("button", { type: "button" }, "edit");
        edit.onclick = () => showForm(state, formFromRecord(state.kind, page.records[i].record));
        const archive = el("button", { type: "button" }, "archive");
        archive.onclick = async () => {
          try {
            await client.archive(state.kind, view.keys[i]);
            await recordScreen(state);
          } catch (err) {
            alert(err instanceof Error ? err.message : String(err));
          }
        };
        tr.append(el("td", {}, edit, archive));
      } else {
        tr.append(el("td", {}, ""));
      }
      tbody.append(tr);
    });
    table.append(tbody);
    body.append(table);
  }

  const pager = pagerFromPage(page);
  const pagination = el("div", { class: "pager" });
  const prev = el("button", { type: "button" }, "← prev");
  const next = el("button", { type: "button" }, "next →");
  const prevTo = prevOffset(pager);
  const nextTo = nextOffset(pager);
  prev.disabled = prevTo === null;
  next.disabled = nextTo === null;
  prev.onclick = () => recordScreen({ ...state, offset: prevTo ?? 0 });
  next.onclick = () => recordScreen({ ...state, offset: nextTo ?? state.offset });
  pagination.append(prev, el("span", {}, pageSummary(pager)), next);
  body.append(pagination);

  if (session.canWrite) {
    const fresh = el("button", { type: "button", class: "primary" }, "New record");
    fresh.onclick = () => showForm(state, emptyForm(state.kind));
    body.append(el("div", { class: "toolbar" }, fresh));
  }
  render(`/${state.kind}`, body);
}

function searchControls(state: ListState): HTMLElement {
  const field = el("select", {});
  for (const f of FORM_FIELDS[state.kind]) field.append(el("option", { value: f.name }, f.name));
  const op = el("select", {});
  for (const o of ["contains", "eq", "prefix", "range"]) op.append(el("option", { value: o }, o));
  const value = el("input", { type: "text", placeholder: "value (range: low..high)" });
  const go = el("button", { type: "button" }, "Search");
  const clear = el("button", { type: "button" }, "Clear");
  const archived = el("input", { type: "checkbox", id: "inc-arch" });
  archived.checked = state.includeArchived;
  const error = el("span", { class: "field-error" });

  if (state.predicates.length) {
    field.value = state.predicates[0][0].split(".")[0];
    op.value = state.predicates[0][0].split(".")[1];
    value.value = state.predicates[0][1];
  }
  go.onclick = async () => {
    error.textContent = "";
    const predicates: [string, string][] = value.value
      ? [[`${field.value}.${op.value}`, value.value]]
      : [];
    try {
      await recordScreen({
        ...state,
        predicates,
        offset: 0,
        includeArchived: archived.checked,
      });
    } catch (err) {
      error.textContent = err instanceof Error ? err.message : String(err);
    }
  };
  clear.onclick = () => recordScreen({ ...state, predicates: [], offset: 0 });
  return el(
    "div",
    { class: "search" },
    field,
    op,
    value,
    go,
    clear,
    el("label", { for: "inc-arch" }, archived, "archived"),
    error,
  );
}

function showForm(listState: ListState, form: FormState) {
  const client = session!.client;
  const body = el("div", {});
  body.append(
    el("h1", {}, `${form.mode === "create" ? "New" : "Edit"} — ${KIND_LABELS[form.kind]}`),
  );

  const redraw = (state: FormState) => {
    const panel = el("form", { class: "entry" });
    if (state.formError) panel.append(banner("error", state.formError));
    if (state.needsAuth)
      panel.append(banner("error", "Not authorized — set a valid token in Settings."));
    if (state.saved)
      panel.append(banner("ok", `saved (version ${state.saved.version})`));

    for (const descriptor of FORM_FIELDS[state.kind]) {
      const row = el("div", { class: "field" });
      const label = el("label", {}, descriptor.label);
      if (descriptor.required) label.append(el("span", { class: "req" }, " *"));
      let input: HTMLInputElement | HTMLSelectElement;
      if (descriptor.options) {
        input = el("select", { name: descriptor.name });
        for (const option of descriptor.options)
          input.append(el("option", { value: option }, option));
        input.value = state.values[descriptor.name] ?? descriptor.options[0];
      } else {
        input = el("input", { type: "text", name: descriptor.name });
        input.value = state.values[descriptor.name] ?? "";
      }
      if (state.mode === "update" && descriptor.name === FORM_FIELDS[state.kind][0].name) {
        input.setAttribute("readonly", "readonly");
      }
      input.onchange = () => {
        form = setValue(form, descriptor.name, input.value);
      };
      row.append(label, input);
      if (descriptor.hint) row.append(el("span", { class: "hint" }, descriptor.hint));
      const message = state.fieldErrors[descriptor.name];
      if (message) row.append(el("span", { class: "field-error" }, message));
      panel.append(row);
    }

    const submit = el("button", { type: "submit", class: "primary" }, "Save");
    submit.disabled = !canSubmit(state);
    const back = el("button", { type: "button" }, "Back to list");
    back.onclick = () => recordScreen(listState);
    panel.append(el("div", { class: "toolbar" }, submit, back));
    panel.onsubmit = async (event) => {
      event.preventDefault();
      const settled = await submitForm(client, form, redraw);
      form = settled;
      if (settled.saved) await recordScreen(listState);
    };
    body.replaceChildren(body.firstChild!, panel);
  };

  redraw(form);
  render(`/${form.kind}`, body);
}

// ---- reports --------------------------------------------------------------

async function reportScreen(name: string) {
  const client = session!.client;
  const body = el("div", {}, el("h1", {}, "Reports"));
  const picker = el("div", { class: "toolbar" });
  for (const reportName of REPORT_NAMES) {
    const button = el("button", { type: "button" }, reportName);
    if (reportName === name) button.classList.add("active");
    button.onclick = () => reportScreen(reportName);
    picker.append(button);
  }
  body.append(picker);
  try {
    const html = await client.reportHtml(name);
    const csv = await client.reportCsv(name);
    const blob = new Blob([csv], { type: "text/csv" });
    const download = el("a", { href: URL.createObjectURL(blob), download: `${name}.csv` }, "Download CSV");
    download.classList.add("download");
    const frame = el("iframe", { class: "report" });
    frame.srcdoc = html;
    body.append(download, frame);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      body.append(banner("error", `unknown report: ${name}`));
    } else {
      body.append(banner("error", err instanceof Error ? err.message : String(err)));
    }
  }
  render("/reports", body);
}

// ---- import ---------------------------------------------------------------

async function importScreen() {
  if (!session?.canWrite) {
    render("/import", banner("info", "Import needs an admin token."));
    return;
  }
  const client = session.client;
  const body = el("div", {}, el("h1", {}, "CSV import"));
  const kindSelect = el("select", {});
  for (const kind of KINDS) kindSelect.append(el("option", { value: kind }, kind));
  const file = el("input", { type: "file", accept: ".csv,text/csv" });
  const run = el("button", { type: "button", class: "primary" }, "Import");
  const out = el("div", {});
  run.onclick = async () => {
    const chosen = file.files?.[0];
    if (!chosen) {
      out.replaceChildren(banner("error", "choose a CSV file first"));
      return;
    }
    run.disabled = true;
    try {
      const report = await client.importCsv(
        kindSelect.value as Kind,
        new Uint8Array(await chosen.arrayBuffer()),
      );
      const lines = report.rejected.map((r) =>
        el("li", {}, `line ${r.line_number}: ${r.field || "<row>"} ${r.code}`),
      );
      out.replaceChildren(
        banner("ok", `accepted ${report.accepted} of ${report.total_rows}`),
        el("ul", { class: "rejects" }, ...lines),
      );
    } catch (err) {
      out.replaceChildren(banner("error", err instanceof Error ? err.message : String(err)));
    } finally {
      run.disabled = false;
    }
  };
  body.append(el("div", { class: "toolbar" }, kindSelect, file, run), out);
  render("/import", body);
}

// ---- settings -------------------------------------------------------------

async function settingsScreen() {
  const body = el("div", {}, el("h1", {}, "Settings"));
  const input = el("input", {
    type: "password",
    placeholder: "access token",
    value: localStorage.getItem(TOKEN_KEY) ?? "",
  });
  const save = el("button", { type: "button", class: "primary" }, "Save token");
  const status = el("div", {});
  save.onclick = async () => {
    localStorage.setItem(TOKEN_KEY, input.value);
    session = await startSession();
    try {
      const health = await session.client.health();
      const counts = health.counts;
      status.replaceChildren(
        banner(
          "ok",
          `connected — ${counts.students} students, ${counts.staff} staff, ` +
            `${counts.inventory} inventory items; ` +
            (session.canWrite ? "admin access" : session.canRead ? "read access" : "reports only"),
        ),
      );
    } catch (err) {
      status.replaceChildren(banner("error", err instanceof Error ? err.message : String(err)));
    }
    const app = document.getElementById("app")!;
    app.replaceChildren(navBar("/settings"), body);
  };
  body.append(el("div", { class: "toolbar" }, input, save), status);
  render("/settings", body);
}

// ---- router ---------------------------------------------------------------

async function route() {
  if (!session) session = await startSession();
  const hash = location.hash || "#/students";
  const path = hash.slice(1);
  if (path.startsWith("/reports")) return reportScreen(REPORT_NAMES[0]);
  if (path.startsWith("/import")) return importScreen();
  if (path.startsWith("/settings")) return settingsScreen();
  const kind = KINDS.find((k) => path === `/${k}`);
  if (kind) return recordScreen({ kind, predicates: [], offset: 0, limit: 20, includeArchived: false });
  return recordScreen({
    kind: "students",
    predicates: [],
    offset: 0,
    limit: 20,
    includeArchived: false,
  });
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
