/**
 * Console wiring: polls state/metrics every second (the fallback path),
 * layers the SSE event stream on top for the live timeline, and renders
 * everything as idempotent functions of (latest snapshot, timeline model).
 */
import { ApiClient, ApiError, subscribeEvents } from "./api.js";
import { DIMENSIONS, DIMENSION_VALUES, UNCHANGED, buildRequestBody, describeOutcome } from "./reconfig.js";
import { SeriesBuffer, sparklinePath } from "./sparkline.js";
import { TimelineModel } from "./timeline.js";
import { SERVICE_ORDER, deriveTopology } from "./topology.js";
import type { ConfigJson, MetricsSnapshot, StateSnapshot } from "./types.js";

const api = new ApiClient("");
const timeline = new TimelineModel(500);
const arrivalSeries = new SeriesBuffer(90);
const p95Series = new Map<string, SeriesBuffer>();

let latestState: StateSnapshot | null = null;
let lastMetricsAt = -1;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

// -- topology ---------------------------------------------------------------

function renderTopology(state: StateSnapshot): void {
  const view = deriveTopology(state);
  const nodesBox = el<HTMLDivElement>("topology-nodes");
  nodesBox.replaceChildren(
    ...view.nodes.map((node) => {
      const card = document.createElement("div");
      card.className = `node node-${node.status}`;
      const name = document.createElement("div");
      name.className = "node-name";
      name.textContent = node.service;
      const status = document.createElement("div");
      status.className = "node-status";
      status.textContent =
        node.instances.length > 0 ? `${node.status} (${node.instances.join(", ")})` : node.status;
      card.append(name, status);
      for (const badge of node.badges) {
        const chip = document.createElement("span");
        chip.className = "badge";
        chip.textContent = badge;
        card.append(chip);
      }
      return card;
    }),
  );
  el<HTMLDivElement>("topology-edges").textContent = view.edges
    .map((edge) => `${edge.from} → ${edge.to}`)
    .join("   ");
}

// -- state header ----------------------------------------------------------------

function renderHeader(state: StateSnapshot): void {
  el<HTMLSpanElement>("sim-time").textContent = `${(state.sim_time_ms / 1000).toFixed(1)}s`;
  el<HTMLSpanElement>("pace-now").textContent = state.pace
    ? `${state.pace.mode}${state.pace.mode === "realtime" ? ` x${state.pace.factor}` : ""}`
    : "?";
  const configBox = el<HTMLDivElement>("config-now");
  configBox.replaceChildren(
    ...DIMENSIONS.map((dimension) => {
      const chip = document.createElement("span");
      chip.className = "chip";
      chip.textContent = `${dimension}: ${state.config[dimension]}`;
      return chip;
    }),
  );
  el<HTMLSpanElement>("incident-now").textContent = state.incident
    ? `incident: ${state.incident.kind}`
    : "";
}

// -- faults -----------------------------------------------------------------------

function renderFaults(state: StateSnapshot): void {
  const box = el<HTMLDivElement>("fault-chips");
  const entries = Object.entries(state.active_faults);
  if (entries.length === 0) {
    box.textContent = "no active faults";
    return;
  }
  box.replaceChildren(
    ...entries.map(([id, fault]) => {
      const chip = document.createElement("span");
      chip.className = "fault-chip";
      const label = fault.targets ? `${fault.kind} ${fault.targets.join(",")}` : fault.kind;
      chip.textContent = `#${id} ${label} `;
      const close = document.createElement("button");
      close.textContent = "×";
      close.onclick = async () => {
        try {
          await api.clearFault(id);
          await refreshState();
        } catch (error) {
          toast(String(error));
        }
      };
      chip.append(close);
      return chip;
    }),
  );
}

function setupFaultForm(): void {
  const targetBox = el<HTMLDivElement>("fault-targets");
  for (const service of SERVICE_ORDER.filter((s) => s !== "client")) {
    const label = document.createElement("label");
    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.value = service;
    checkbox.name = "fault-target";
    label.append(checkbox, ` ${service}`);
    targetBox.append(label);
  }
  const kindSelect = el<HTMLSelectElement>("fault-kind");
  const injectButton = el<HTMLButtonElement>("fault-inject");
  const update = () => {
    const any = targetBox.querySelectorAll("input:checked").length > 0;
    injectButton.disabled = !any;
  };
  targetBox.addEventListener("change", update);
  update();
  injectButton.onclick = async () => {
    const targets = [...targetBox.querySelectorAll<HTMLInputElement>("input:checked")].map(
      (input) => input.value,
    );
    const kind = kindSelect.value;
    const spec: Record<string, unknown> = { kind, targets };
    if (kind === "latency") {
      spec["factor"] = Number(el<HTMLInputElement>("fault-factor").value) || 10;
    }
    try {
      await api.injectFault(spec as never);
      toast(`fault injected on ${targets.join(", ")}`);
      await refreshState();
    } catch (error) {
      toast(String(error));
    }
  };
}

// -- reconfigure form -----------------------------------------------------------------

function setupReconfigForm(): void {
  const form = el<HTMLDivElement>("reconfig-selects");
  for (const dimension of DIMENSIONS) {
    const label = document.createElement("label");
    label.textContent = dimension;
    const select = document.createElement("select");
    select.id = `dim-${dimension}`;
    const none = document.createElement("option");
    none.value = UNCHANGED;
    none.textContent = UNCHANGED;
    select.append(none);
    for (const value of DIMENSION_VALUES[dimension]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      select.append(option);
    }
    label.append(select);
    form.append(label);
  }
  el<HTMLButtonElement>("reconfig-submit").onclick = submitReconfigure;
}

async function submitReconfigure(): Promise<void> {
  const selections: Record<string, string> = {};
  for (const dimension of DIMENSIONS) {
    selections[dimension] = el<HTMLSelectElement>(`dim-${dimension}`).value;
  }
  const body = buildRequestBody(selections);
  const outcomeBox = el<HTMLDivElement>("reconfig-outcome");
  const current = latestState?.config;
  if (!current) return;
  try {
    const response = await api.reconfigure(body);
    const outcome = describeOutcome(current, body, response);
    if (outcome.noChange) {
      toast("no change: target equals current configuration");
    } else {
      toast(`plan #${outcome.planId} accepted`);
    }
    outcomeBox.replaceChildren(
      ...DIMENSIONS.map((dimension) => {
        const chip = document.createElement("span");
        const filled = outcome.plannerFilled.includes(dimension);
        const requested = outcome.requested.includes(dimension);
        chip.className = `chip${filled ? " chip-filled" : ""}${requested ? " chip-requested" : ""}`;
        chip.textContent = `${dimension}: ${outcome.target[dimension]}${filled ? " (planner)" : ""}`;
        chip.title = filled
          ? "filled in by the planner to keep the configuration valid"
          : requested
            ? "explicitly requested"
            : "unchanged";
        return chip;
      }),
    );
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      const body409 = error.body as { violations?: { constraint: string; message: string }[] };
      outcomeBox.textContent = (body409.violations ?? [])
        .map((v) => `${v.constraint}: ${v.message}`)
        .join("; ");
      toast("request unsatisfiable");
    } else {
      toast(String(error));
    }
  }
}

// -- metrics ----------------------------------------------------------------------------

const SPARK_SERVICES = ["webui", "recommender", "auth", "local_cache_db", "local_static_db"];

function renderMetrics(metrics: MetricsSnapshot): void {
  if (metrics.now === lastMetricsAt) return;
  lastMetricsAt = metrics.now;
  arrivalSeries.push(metrics.arrival_rate ?? 0);
  for (const service of SPARK_SERVICES) {
    const buffer = p95Series.get(service) ?? new SeriesBuffer(90);
    p95Series.set(service, buffer);
    buffer.push(metrics.services[service]?.p95_ms ?? null);
  }
  const box = el<HTMLDivElement>("sparklines");
  const rows: HTMLElement[] = [];
  rows.push(sparkRow("arrival rate (req/s)", arrivalSeries.snapshot(), arrivalSeries.last()));
  for (const service of SPARK_SERVICES) {
    const buffer = p95Series.get(service);
    if (!buffer) continue;
    rows.push(sparkRow(`${service} p95 (ms)`, buffer.snapshot(), buffer.last()));
  }
  box.replaceChildren(...rows);
}

function sparkRow(label: string, series: (number | null)[], last: number | null): HTMLElement {
  const row = document.createElement("div");
  row.className = "spark-row";
  const name = document.createElement("span");
  name.className = "spark-label";
  name.textContent = label;
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", "160");
  svg.setAttribute("height", "28");
  const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
  path.setAttribute("d", sparklinePath(series, { width: 160, height: 28 }));
  path.setAttribute("fill", "none");
  path.setAttribute("stroke", "currentColor");
  svg.append(path);
  const value = document.createElement("span");
  value.className = "spark-value";
  value.textContent = last === null ? "-" : String(Math.round(last * 10) / 10);
  row.append(name, svg, value);
  return row;
}

// -- timeline ----------------------------------------------------------------------------

function renderTimeline(): void {
  const box = el<HTMLUListElement>("timeline");
  const entries = timeline.entries.slice(-200);
  box.replaceChildren(
    ...entries
      .slice()
      .reverse()
      .map((entry) => {
        const item = document.createElement("li");
        item.className = `tl tl-${entry.kind}`;
        const time = document.createElement("span");
        time.className = "tl-time";
        time.textContent = `${(entry.t / 1000).toFixed(1)}s`;
        const text = document.createElement("span");
        text.textContent = ` ${entry.text} `;
        item.append(time, text);
        for (const chip of entry.chips) {
          const span = document.createElement("span");
          span.className = "chip chip-change";
          span.textContent = `${chip.dimension}: ${chip.from} → ${chip.to}`;
          item.append(span);
        }
        return item;
      }),
  );
}

// -- pace controls --------------------------------------------------------------------------

function setupPace(): void {
  el<HTMLButtonElement>("pace-pause").onclick = () => api.setPace("paused").then(refreshState);
  el<HTMLButtonElement>("pace-play").onclick = () =>
    api.setPace("realtime", Number(el<HTMLInputElement>("pace-factor").value) || 1).then(refreshState);
  el<HTMLButtonElement>("pace-ff").onclick = () => api.setPace("fast_forward").then(refreshState);
}

// -- glue -------------------------------------------------------------------------------------

let toastTimer: number | undefined;

function toast(message: string): void {
  const box = el<HTMLDivElement>("toast");
  box.textContent = message;
  box.classList.add("visible");
  window.clearTimeout(toastTimer);
  toastTimer = window.setTimeout(() => box.classList.remove("visible"), 4000);
}

function setBanner(text: string, bad: boolean): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = text;
  banner.className = bad ? "banner banner-bad" : "banner";
}

async function refreshState(): Promise<void> {
  try {
    const state = await api.getState();
    latestState = state;
    renderHeader(state);
    renderTopology(state);
    renderFaults(state);
  } catch (error) {
    setBanner(`control plane unreachable: ${error}`, true);
  }
}

async function refreshMetrics(): Promise<void> {
  try {
    renderMetrics(await api.getMetrics());
  } catch {
    // metrics degrade silently; the state banner already reports outages
  }
}

function start(): void {
  setupReconfigForm();
  setupFaultForm();
  setupPace();
  void refreshState();
  void refreshMetrics();
  // 1s polling: keeps working when the event stream is unavailable.
  window.setInterval(() => {
    void refreshState();
    void refreshMetrics();
  }, 1000);
  subscribeEvents(
    "",
    (record) => {
      timeline.push(record);
      renderTimeline();
    },
    (status) => {
      if (status === "connected") {
        setBanner("event stream connected", false);
      } else {
        setBanner("event stream lost; reconnecting (polling keeps state fresh)", true);
      }
    },
  );
}

start();
