// Browser entry point. All logic lives in the view-model modules; this
// file only builds DOM from them and forwards clicks to WorkbenchApp.
// Open as: index.html?api=http://127.0.0.1:8000[&session=<id>]

import { ApiClient } from "./api.js";
import { WorkbenchApp } from "./app.js";
import { renderHistogram, type ChartModel } from "./histogram.js";
import {
  boundsTableModel,
  cliqueBrowserModel,
  consistencyPanelModel,
  runControlsModel,
  statementEditorModel,
} from "./panels.js";
import type { BoundsPayload, ConsistencyPayload, ResultsPayload } from "./types.js";

const query = new URLSearchParams(location.search);
const baseUrl = query.get("api") ?? "http://127.0.0.1:8000";
const app = new WorkbenchApp(new ApiClient(baseUrl), query.get("session"));

let lastResults: ResultsPayload | null = null;
let lastBounds: BoundsPayload | null = null;
let lastConsistency: ConsistencyPayload | null = null;

function el(tag: string, attrs: Record<string, string> = {}, ...children: (Node | string)[]) {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  for (const c of children) node.append(c);
  return node;
}

function panel(title: string, ...children: (Node | string)[]) {
  return el("section", { class: "panel" }, el("h2", {}, title), ...children);
}

async function guard(action: () => Promise<unknown>) {
  try {
    await action();
  } catch (err) {
    console.error(err);
    alert(String(err));
  }
  render();
}

function editorPanel() {
  const model = statementEditorModel(app.state);
  const input = el("input", {
    type: "text",
    value: model.draft,
    placeholder: "P(i | c) = 1  /  S+(N, H)  /  0.1 <= P(n | h) <= 0.25",
    size: "48",
  }) as HTMLInputElement;
  input.addEventListener("input", () => app.setDraft(input.value));
  const add = el("button", {}, "add statement") as HTMLButtonElement;
  add.disabled = model.submitDisabled;
  add.addEventListener("click", () => guard(() => app.submitDraft()));
  const findings = el(
    "ul",
    { class: "findings" },
    ...model.findings.map((f) => el("li", { class: f.severity }, `${f.code}: ${f.message}`)),
  );
  const scope = model.variableScope
    ? el("p", { class: "scope" }, `clique scope: ${model.variableScope.join(", ")}`)
    : "";
  const rows = model.statements.map((s) => {
    const remove = el("button", { class: "remove" }, "x") as HTMLButtonElement;
    remove.addEventListener("click", () => guard(() => app.removeStatement(s.id)));
    const warn = s.warnings.map((w) => el("span", { class: "warning" }, ` [${w.code}]`));
    return el(
      "li",
      { class: s.inScope ? "" : "out-of-scope" },
      el("code", {}, s.text),
      ` (${s.id}, ${s.robustnessClass}) `,
      ...warn,
      remove,
    );
  });
  const badge = model.staleBadge ? el("span", { class: "stale" }, "results stale") : "";
  return panel("statements", badge, el("ul", {}, ...rows), scope, input, add, findings);
}

function runPanel() {
  const model = runControlsModel(app.state);
  const fields: [string, keyof typeof app.state.runParams, number][] = [
    ["n_target", "n_target", model.nTarget],
    ["max_draws", "max_draws", model.maxDraws],
    ["seed", "seed", model.seed],
    ["bins", "bins", model.bins],
  ];
  const inputs = fields.map(([label, key, value]) => {
    const input = el("input", { type: "number", value: String(value) }) as HTMLInputElement;
    input.addEventListener("change", () => app.setRunParams({ [key]: Number(input.value) }));
    return el("label", {}, `${label} `, input);
  });
  const run = el("button", {}, model.running ? "running..." : "run pipeline") as HTMLButtonElement;
  run.disabled = model.disabled;
  run.addEventListener("click", () => {
    render(); // repaint with the control disabled before the wait
    guard(() => app.run());
  });
  const info = app.state.snapshot?.run;
  const summary = info
    ? el(
        "p",
        {},
        `verdict ${info.verdict}; accepted ${info.accepted} of ${info.draws_total} draws ` +
          `(rate ${info.acceptance_rate.toExponential(2)})`,
      )
    : el("p", {}, "no run yet");
  return panel("run", ...inputs, run, summary);
}

function chartSvg(model: ChartModel) {
  const w = 520;
  const h = 180;
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${w} ${h}`);
  svg.setAttribute("width", String(w));
  const peak = Math.max(...model.bars.map((b) => b.height), 1e-12);
  for (const bar of model.bars) {
    const rect = document.createElementNS("http://www.w3.org/2000/svg", "rect");
    const barH = (bar.height / peak) * (h - 20);
    rect.setAttribute("x", String(bar.x0 * w));
    rect.setAttribute("width", String(Math.max((bar.x1 - bar.x0) * w - 1, 1)));
    rect.setAttribute("y", String(h - barH));
    rect.setAttribute("height", String(barH));
    rect.setAttribute("fill", "#4477aa");
    svg.append(rect);
  }
  if (model.meanMarker !== null) {
    const line = document.createElementNS("http://www.w3.org/2000/svg", "line");
    line.setAttribute("x1", String(model.meanMarker * w));
    line.setAttribute("x2", String(model.meanMarker * w));
    line.setAttribute("y1", "0");
    line.setAttribute("y2", String(h));
    line.setAttribute("stroke", "#cc3311");
    svg.append(line);
  }
  return svg;
}

function histogramPanel() {
  const input = el("input", {
    type: "text",
    value: app.state.selectedQuery,
    placeholder: "P(h | ~n, ~i, ~c)",
    size: "28",
  }) as HTMLInputElement;
  input.addEventListener("input", () => app.setQuery(input.value));
  const fetchBtn = el("button", {}, "plot") as HTMLButtonElement;
  fetchBtn.addEventListener("click", () =>
    guard(async () => {
      lastResults = await app.results();
    }),
  );
  const body: (Node | string)[] = [];
  if (lastResults) {
    const model = renderHistogram(lastResults.histogram);
    if (model.kind === "empty") {
      body.push(el("p", { class: "notice" }, model.notice ?? "no defined samples"));
    } else {
      body.push(chartSvg(model));
      body.push(
        el(
          "p",
          {},
          `${model.query}: mean ${model.meanMarker?.toFixed(4)}, sd ${model.sampleSd?.toFixed(4)}, ` +
            `${model.definedCount} defined / ${model.undefinedCount} undefined`,
        ),
      );
    }
  }
  return panel("second-order histogram", input, fetchBtn, ...body);
}

function boundsPanel() {
  const refresh = el("button", {}, "load bounds") as HTMLButtonElement;
  refresh.addEventListener("click", () =>
    guard(async () => {
      lastBounds = await app.client.bounds(app.state.sessionId ?? "");
    }),
  );
  const body: (Node | string)[] = [refresh];
  if (lastBounds) {
    const model = boundsTableModel(lastBounds);
    const rows = model.rows.map((r) =>
      el(
        "tr",
        {},
        el("td", {}, String(r.index)),
        el("td", {}, r.assignment),
        el("td", {}, r.lo.toFixed(4)),
        el("td", {}, r.hi.toFixed(4)),
      ),
    );
    body.push(
      el(
        "table",
        {},
        el(
          "tr",
          {},
          el("th", {}, "#"),
          el("th", {}, "assignment"),
          el("th", {}, "lo"),
          el("th", {}, "hi"),
        ),
        ...rows,
      ),
    );
    if (model.stale) body.push(el("p", { class: "stale" }, "bounds are stale"));
  }
  return panel("constituent bounds", ...body);
}

function consistencyPanel() {
  const refresh = el("button", {}, "check consistency") as HTMLButtonElement;
  refresh.addEventListener("click", () =>
    guard(async () => {
      lastConsistency = await app.client.consistency(app.state.sessionId ?? "");
    }),
  );
  const body: (Node | string)[] = [refresh];
  if (lastConsistency && app.state.sessionId) {
    const model = consistencyPanelModel(app.state.sessionId, lastConsistency);
    body.push(el("p", {}, `${model.verdict}: ${model.evidence}`));
    const items = model.suggestions.map((s) => {
      const remove = el("button", {}, `remove ${s.statementId}`) as HTMLButtonElement;
      remove.addEventListener("click", () =>
        guard(async () => {
          await app.removeStatement(s.statementId);
          lastConsistency = null;
        }),
      );
      return el(
        "li",
        {},
        `${s.statementId} (${s.kind}${s.restoresFeasibility ? ", restores feasibility" : ""}): ` +
          s.evidence +
          " ",
        remove,
      );
    });
    body.push(el("ul", {}, ...items));
  }
  return panel("consistency", ...body);
}

function cliquesPanel() {
  const refresh = el("button", {}, "load cliques") as HTMLButtonElement;
  refresh.addEventListener("click", () => guard(() => app.refreshCliques()));
  const body: (Node | string)[] = [refresh];
  if (app.cliques) {
    const model = cliqueBrowserModel(app.cliques, app.state.cliqueFilter?.index ?? null);
    body.push(el("p", {}, `elimination order: ${model.eliminationOrder.join(" ")}`));
    const items = model.cliques.map((c) => {
      const pick = el("button", {}, c.selected ? "clear filter" : "filter editor");
      pick.addEventListener("click", () => {
        app.selectClique(c.selected ? null : c.index);
        render();
      });
      return el(
        "li",
        { class: c.selected ? "selected" : "" },
        `{${c.variables.join(", ")}} holds ${c.statementIds.length} statement(s) `,
        pick,
      );
    });
    body.push(el("ul", {}, ...items));
    for (const f of model.crossClique) {
      body.push(el("p", { class: "warning" }, `${f.statementId ?? "?"}: ${f.message}`));
    }
  }
  return panel("cliques", ...body);
}

function openPanel() {
  const area = el("textarea", { rows: "8", cols: "60" }) as HTMLTextAreaElement;
  area.placeholder = "var H : h > hbar\nvar N : n > nbar\nedge N -> H\nP(h | n) > P(h)\n...";
  const open = el("button", {}, "create session") as HTMLButtonElement;
  open.addEventListener("click", () =>
    guard(async () => {
      await app.open(area.value);
      history.replaceState(null, "", `?api=${encodeURIComponent(baseUrl)}&session=${app.state.sessionId}`);
    }),
  );
  return panel("new session", area, el("br", {}), open);
}

function render() {
  const root = document.getElementById("root");
  if (!root) return;
  root.replaceChildren();
  if (app.state.offline) {
    root.append(el("div", { class: "banner" }, `cannot reach ${baseUrl}; drafts are kept locally`));
  }
  if (!app.state.snapshot) {
    root.append(openPanel());
    return;
  }
  root.append(
    el("p", {}, `session ${app.state.snapshot.id}, k = ${app.state.snapshot.network.k}`),
    editorPanel(),
    runPanel(),
    histogramPanel(),
    boundsPanel(),
    consistencyPanel(),
    cliquesPanel(),
  );
}

async function boot() {
  if (app.state.sessionId) {
    await app.sync();
  }
  render();
}

void boot();
