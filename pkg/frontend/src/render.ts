/**
 * DOM rendering for the review screen. Pure functions from view state to
 * elements; event wiring goes through the handlers argument so the
 * controller stays the single place that talks to the API.
 */

import type { Action, ElementSummary, Report, Scope } from "./api.js";
import type { DiffRow, ElementGroup, ViewModel } from "./model.js";
import { canPropagate, elementContext, isResolved, pendingRows } from "./model.js";

export interface Handlers {
  onDecideRow(row: DiffRow, action: Action, scope: Scope): void;
  onDecideGroup(group: ElementGroup, action: Action, scope: Scope): void;
}

export function renderApp(vm: ViewModel, reports: Report[], handlers: Handlers): HTMLElement {
  const root = document.createElement("div");
  root.className = "review";

  root.appendChild(renderHeader(vm));

  const deleted = reports.flatMap((r) => r.deleted);
  const created = reports.flatMap((r) => r.created);

  if (vm.groups.length === 0 && deleted.length === 0 && created.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No differences.";
    root.appendChild(empty);
    return root;
  }

  if (deleted.length > 0) root.appendChild(renderElementSection("Deleted elements", deleted, "deleted"));
  if (created.length > 0) root.appendChild(renderElementSection("Created elements", created, "created"));

  const list = document.createElement("div");
  list.className = "group-list";
  for (const group of vm.groups) {
    list.appendChild(renderGroupCard(group, reports, handlers));
  }
  root.appendChild(list);
  return root;
}

function renderHeader(vm: ViewModel): HTMLElement {
  const header = document.createElement("header");
  const title = document.createElement("h1");
  title.textContent = "Review";
  header.appendChild(title);

  const badge = document.createElement("span");
  badge.className = "pending-badge";
  badge.textContent = `${vm.pending} pending`;
  header.appendChild(badge);
  return header;
}

function renderElementSection(label: string, summaries: ElementSummary[], kind: string): HTMLElement {
  const section = document.createElement("section");
  section.className = `element-section ${kind}`;

  const heading = document.createElement("h2");
  heading.textContent = `${label} (${summaries.length})`;
  section.appendChild(heading);

  for (const summary of summaries) {
    const item = document.createElement("div");
    item.className = "element-item";
    item.appendChild(renderThumb(summary.attributes));

    const text = document.createElement("div");
    const name = document.createElement("div");
    name.className = "element-name";
    name.textContent = `${summary.type || "element"} ${summary.handle}`;
    text.appendChild(name);

    const attrs = document.createElement("div");
    attrs.className = "element-attrs";
    attrs.textContent = Object.entries(summary.attributes)
      .map(([key, value]) => `${key}=${value}`)
      .join("  ");
    text.appendChild(attrs);

    item.appendChild(text);
    section.appendChild(item);
  }
  return section;
}

/**
 * Screenshot when the summary carries one, otherwise a schematic box
 * drawn from the element's geometry attributes.
 */
export function renderThumb(attributes: Record<string, string>): HTMLElement {
  const screenshot = attributes["screenshot"];
  if (screenshot) {
    const img = document.createElement("img");
    img.className = "thumb";
    img.src = screenshot;
    img.alt = "element screenshot";
    return img;
  }

  const frame = document.createElement("div");
  frame.className = "thumb geometry";
  const x = Number(attributes["x"] ?? "0");
  const y = Number(attributes["y"] ?? "0");
  const width = Number(attributes["width"] ?? "0");
  const height = Number(attributes["height"] ?? "0");
  if ([x, y, width, height].some(Number.isNaN) || width <= 0 || height <= 0) {
    frame.classList.add("no-geometry");
    frame.textContent = "?";
    return frame;
  }

  // Fit the page-coordinate rect into a fixed 96x64 viewport.
  const scale = Math.min(96 / Math.max(x + width, 1), 64 / Math.max(y + height, 1), 1);
  const box = document.createElement("div");
  box.className = "geometry-box";
  box.style.left = `${Math.round(x * scale)}px`;
  box.style.top = `${Math.round(y * scale)}px`;
  box.style.width = `${Math.max(Math.round(width * scale), 3)}px`;
  box.style.height = `${Math.max(Math.round(height * scale), 3)}px`;
  frame.appendChild(box);
  return frame;
}

function renderGroupCard(group: ElementGroup, reports: Report[], handlers: Handlers): HTMLElement {
  const card = document.createElement("article");
  card.className = "group-card";
  if (isResolved(group)) card.classList.add("resolved");

  card.appendChild(renderGroupHeader(group, reports));
  card.appendChild(renderGroupActions(group, handlers));

  const table = document.createElement("table");
  table.className = "diff-table";
  const head = document.createElement("tr");
  for (const label of ["attribute", "expected", "actual", "", ""]) {
    const th = document.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const row of group.rows) {
    table.appendChild(renderRow(row, handlers));
  }
  card.appendChild(table);
  return card;
}

function renderGroupHeader(group: ElementGroup, reports: Report[]): HTMLElement {
  const header = document.createElement("div");
  header.className = "group-header";

  const context = elementContext(reports, group.occurrence);
  header.appendChild(renderThumb(context ? context.attributes : {}));

  const title = document.createElement("div");
  const label = document.createElement("div");
  label.className = "group-label";
  label.textContent = group.label;
  title.appendChild(label);

  const where = document.createElement("div");
  where.className = "group-context";
  const type = context?.type ? `${context.type} ` : "";
  where.textContent =
    `${type}${group.occurrence.handle} in ` +
    `${group.occurrence.test_id}/${group.occurrence.step_name}`;
  title.appendChild(where);
  header.appendChild(title);

  if (isResolved(group)) {
    const pill = document.createElement("span");
    pill.className = "status-pill";
    pill.textContent = "resolved";
    header.appendChild(pill);
  }
  return header;
}

function renderGroupActions(group: ElementGroup, handlers: Handlers): HTMLElement {
  const bar = document.createElement("div");
  bar.className = "group-actions";

  const actionable = pendingRows(group).length > 0;
  const propagatable = group.rows.some(canPropagate);
  const toggle = propagatable ? renderPropagateToggle() : null;

  const scope = (): Scope => (toggle?.input.checked ? "propagate" : "single");

  const accept = actionButton("Accept all", "accept", !actionable);
  accept.addEventListener("click", () => handlers.onDecideGroup(group, "accept", scope()));
  bar.appendChild(accept);

  const ignore = actionButton("Ignore all", "ignore", !actionable);
  ignore.addEventListener("click", () => handlers.onDecideGroup(group, "ignore", scope()));
  bar.appendChild(ignore);

  if (toggle) bar.appendChild(toggle.label);
  return bar;
}

function renderRow(row: DiffRow, handlers: Handlers): HTMLElement {
  const tr = document.createElement("tr");
  tr.className = `diff-row ${row.status}`;

  const key = document.createElement("td");
  key.className = "diff-key";
  key.textContent = row.signature.key;
  tr.appendChild(key);

  tr.appendChild(valueCell(row.signature.expected));
  tr.appendChild(valueCell(row.signature.actual));

  const meta = document.createElement("td");
  meta.className = "diff-meta";
  if (row.count > 1) {
    const badge = document.createElement("span");
    badge.className = "occurrence-badge";
    badge.textContent = `×${row.count}`;
    meta.appendChild(badge);
  }
  tr.appendChild(meta);

  const actions = document.createElement("td");
  actions.className = "diff-actions";
  if (row.status === "pending") {
    const disabled = row.busy;
    const toggle = canPropagate(row) ? renderPropagateToggle() : null;
    const scope = (): Scope => (toggle?.input.checked ? "propagate" : "single");

    const accept = actionButton("Accept", "accept", disabled);
    accept.addEventListener("click", () => handlers.onDecideRow(row, "accept", scope()));
    actions.appendChild(accept);

    const ignore = actionButton("Ignore", "ignore", disabled);
    ignore.addEventListener("click", () => handlers.onDecideRow(row, "ignore", scope()));
    actions.appendChild(ignore);

    if (toggle) actions.appendChild(toggle.label);
  } else {
    const pill = document.createElement("span");
    pill.className = "status-pill";
    pill.textContent = row.status;
    actions.appendChild(pill);
  }
  if (row.error) {
    const error = document.createElement("span");
    error.className = "row-error";
    error.textContent = row.error;
    actions.appendChild(error);
  }
  tr.appendChild(actions);
  return tr;
}

function valueCell(value: string | null): HTMLElement {
  const td = document.createElement("td");
  td.className = "diff-value";
  if (value === null) {
    td.classList.add("absent");
    td.textContent = "(absent)";
  } else {
    td.textContent = value;
  }
  return td;
}

function actionButton(label: string, action: Action, disabled: boolean): HTMLButtonElement {
  const button = document.createElement("button");
  button.className = `action-${action}`;
  button.textContent = label;
  button.disabled = disabled;
  return button;
}

function renderPropagateToggle(): { label: HTMLElement; input: HTMLInputElement } {
  const label = document.createElement("label");
  label.className = "propagate-toggle";
  const input = document.createElement("input");
  input.type = "checkbox";
  input.checked = true;
  label.appendChild(input);
  label.appendChild(document.createTextNode("propagate"));
  return { label, input };
}

export function renderBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = document.createElement("div");
  banner.className = "banner error";

  const text = document.createElement("span");
  text.textContent = message;
  banner.appendChild(text);

  const retry = document.createElement("button");
  retry.textContent = "Retry";
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}
