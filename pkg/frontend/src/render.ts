/** DOM renderer: builds the page skeleton once, then syncs it from a
 * ViewState on every update. Interactive elements call back through the
 * Handlers interface; the renderer itself never talks to the service.
 */
import { projectEntries } from "./scatter";
import type { ViewState } from "./state";
import type { FeedbackKind } from "./types";

export interface Handlers {
  onSlider(index: number, value: number): void;
  onFeedback(kind: FeedbackKind): void;
  onStep(): void;
  onAxisChange(axis: "x" | "y", objective: number): void;
  onRetry(): void;
  onReconnect(): void;
  onDismissToast(): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) node.textContent = text;
  return node;
}

export class Renderer {
  private readonly root: HTMLElement;
  private readonly handlers: Handlers;

  private banner!: HTMLElement;
  private reconnect!: HTMLElement;
  private toast!: HTMLElement;
  private header!: HTMLElement;
  private activePolicy!: HTMLElement;
  private sliders!: HTMLElement;
  private weightsError!: HTMLElement;
  private axisControls!: HTMLElement;
  private axisX!: HTMLSelectElement;
  private axisY!: HTMLSelectElement;
  private scatter!: SVGSVGElement;
  private entriesTable!: HTMLElement;
  private juryPanel!: HTMLElement;
  private posteriorPanel!: HTMLElement;
  private feed!: HTMLElement;
  private grid!: HTMLElement;
  private sessionInfo!: HTMLElement;

  constructor(root: HTMLElement, handlers: Handlers) {
    this.root = root;
    this.handlers = handlers;
    this.buildSkeleton();
  }

  private buildSkeleton(): void {
    this.root.innerHTML = "";

    this.banner = el("div", { class: "banner hidden", "data-testid": "retry-banner" });
    const bannerText = el("span", { "data-testid": "retry-message" });
    const retryButton = el("button", { "data-testid": "retry-button" }, "Retry");
    retryButton.addEventListener("click", () => this.handlers.onRetry());
    this.banner.append(bannerText, retryButton);

    this.reconnect = el("div", {
      class: "banner hidden",
      "data-testid": "reconnect-prompt",
    });
    const reconnectButton = el(
      "button",
      { "data-testid": "reconnect-button" },
      "Reconnect",
    );
    reconnectButton.addEventListener("click", () => this.handlers.onReconnect());
    this.reconnect.append(el("span", {}, "Session expired."), reconnectButton);

    this.toast = el("div", { class: "toast hidden", "data-testid": "apology-toast" });
    const toastText = el("span", { "data-testid": "toast-text" });
    const toastClose = el("button", { "data-testid": "toast-dismiss" }, "x");
    toastClose.addEventListener("click", () => this.handlers.onDismissToast());
    this.toast.append(toastText, toastClose);

    this.header = el("div", { class: "header" });
    this.activePolicy = el("strong", { "data-testid": "active-policy" });
    this.sessionInfo = el("span", { "data-testid": "session-info" });

    this.sliders = el("div", { class: "sliders", "data-testid": "sliders" });
    this.weightsError = el("div", {
      class: "error hidden",
      "data-testid": "weights-error",
    });

    this.axisControls = el("div", { class: "axes hidden", "data-testid": "axis-controls" });
    this.axisX = document.createElement("select");
    this.axisX.setAttribute("data-testid", "axis-x");
    this.axisY = document.createElement("select");
    this.axisY.setAttribute("data-testid", "axis-y");
    this.axisX.addEventListener("change", () =>
      this.handlers.onAxisChange("x", Number(this.axisX.value)),
    );
    this.axisY.addEventListener("change", () =>
      this.handlers.onAxisChange("y", Number(this.axisY.value)),
    );
    this.axisControls.append("x:", this.axisX, "y:", this.axisY);

    this.scatter = document.createElementNS(SVG_NS, "svg");
    this.scatter.setAttribute("viewBox", "0 0 240 240");
    this.scatter.setAttribute("data-testid", "scatter");
    this.entriesTable = el("div", { class: "entries", "data-testid": "entries" });

    const approve = el("button", { "data-testid": "approve-button" }, "Approve");
    approve.addEventListener("click", () => this.handlers.onFeedback("approve"));
    const disapprove = el("button", { "data-testid": "disapprove-button" }, "Disapprove");
    disapprove.addEventListener("click", () => this.handlers.onFeedback("disapprove"));
    const step = el("button", { "data-testid": "step-button" }, "Step");
    step.addEventListener("click", () => this.handlers.onStep());
    const controls = el("div", { class: "controls" });
    controls.append(approve, disapprove, step);

    this.juryPanel = el("div", { class: "jury", "data-testid": "jury-panel" });
    this.posteriorPanel = el("div", { class: "posterior", "data-testid": "posterior" });
    this.feed = el("ul", { class: "feed", "data-testid": "event-feed" });
    this.grid = el("div", { class: "grid hidden", "data-testid": "grid" });

    this.header.append(this.activePolicy, this.sessionInfo);
    this.root.append(
      this.banner,
      this.reconnect,
      this.toast,
      this.header,
      this.sliders,
      this.weightsError,
      this.axisControls,
      this.scatter as unknown as HTMLElement,
      this.entriesTable,
      controls,
      this.juryPanel,
      this.posteriorPanel,
      this.grid,
      this.feed,
    );
  }

  update(state: ViewState): void {
    this.banner.classList.toggle("hidden", state.phase !== "unreachable");
    if (state.phase === "unreachable") {
      const text = this.banner.querySelector('[data-testid="retry-message"]')!;
      text.textContent = `Service unreachable: ${state.lastError ?? "unknown error"}`;
    }
    this.reconnect.classList.toggle("hidden", !state.needsReconnect);

    this.toast.classList.toggle("hidden", state.toast === null);
    this.toast.querySelector('[data-testid="toast-text"]')!.textContent =
      state.toast ?? "";

    this.activePolicy.textContent =
      state.activePolicyId === null ? "" : `policy #${state.activePolicyId}`;
    if (state.snapshot) {
      const snap = state.snapshot;
      this.sessionInfo.textContent =
        ` step ${snap.step} | episode ${snap.episode}` +
        `${snap.terminal ? " | episode boundary" : ""} | switches ${snap.switches}`;
    }

    this.syncSliders(state);
    this.weightsError.classList.toggle("hidden", state.weightsError === null);
    this.weightsError.textContent = state.weightsError ?? "";
    this.syncAxes(state);
    this.syncScatter(state);
    this.syncEntries(state);
    this.syncJury(state);
    this.syncPosterior(state);
    this.syncGrid(state);
    this.syncFeed(state);
  }

  private syncSliders(state: ViewState): void {
    const labels = state.momdp?.objective_labels ?? [];
    const existing = this.sliders.querySelectorAll("input");
    if (existing.length !== state.weights.length) {
      this.sliders.innerHTML = "";
      state.weights.forEach((_, index) => {
        const row = el("label", { class: "slider-row" });
        const input = document.createElement("input");
        input.type = "range";
        input.min = "0";
        input.max = "1";
        input.step = "0.01";
        input.setAttribute("data-testid", `slider-${index}`);
        input.addEventListener("input", () =>
          this.handlers.onSlider(index, Number(input.value)),
        );
        const caption = el("span", { "data-testid": `slider-label-${index}` });
        row.append(caption, input);
        this.sliders.append(row);
      });
    }
    state.weights.forEach((weight, index) => {
      const input = this.sliders.querySelector<HTMLInputElement>(
        `[data-testid="slider-${index}"]`,
      )!;
      input.value = String(weight);
      const caption = this.sliders.querySelector(
        `[data-testid="slider-label-${index}"]`,
      )!;
      caption.textContent = `${labels[index] ?? `objective ${index}`}: ${weight.toFixed(3)}`;
    });
  }

  private syncAxes(state: ViewState): void {
    const d = state.momdp?.d ?? 0;
    this.axisControls.classList.toggle("hidden", d <= 2);
    const labels = state.momdp?.objective_labels ?? [];
    for (const select of [this.axisX, this.axisY]) {
      if (select.options.length !== d) {
        select.innerHTML = "";
        labels.forEach((label, i) => {
          const option = document.createElement("option");
          option.value = String(i);
          option.textContent = label;
          select.append(option);
        });
      }
    }
    this.axisX.value = String(state.axisX);
    this.axisY.value = String(state.axisY);
  }

  private syncScatter(state: ViewState): void {
    this.scatter.innerHTML = "";
    if (!state.coverage) return;
    const points = projectEntries(
      state.coverage,
      state.axisX,
      state.axisY,
      state.activePolicyId,
    );
    for (const point of points) {
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(20 + point.x * 200));
      circle.setAttribute("cy", String(220 - point.y * 200));
      circle.setAttribute("r", point.active ? "8" : "5");
      circle.setAttribute("data-policy-id", String(point.policyId));
      circle.setAttribute("class", point.active ? "point active" : "point");
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `#${point.policyId}: (${point.label})`;
      circle.append(title);
      this.scatter.append(circle);
    }
  }

  private syncEntries(state: ViewState): void {
    this.entriesTable.innerHTML = "";
    if (!state.coverage) return;
    for (const entry of state.coverage.entries) {
      const active = entry.policy_id === state.activePolicyId;
      const row = el(
        "div",
        {
          class: active ? "entry active" : "entry",
          "data-testid": `entry-${entry.policy_id}`,
        },
        `#${entry.policy_id} (${entry.value.map((v) => v.toPrecision(4)).join(", ")})`,
      );
      this.entriesTable.append(row);
    }
  }

  private syncJury(state: ViewState): void {
    this.juryPanel.innerHTML = "";
    const snap = state.snapshot;
    if (!snap) return;
    this.juryPanel.append(
      el("div", { "data-testid": "welfare" }, `welfare ${snap.welfare.toFixed(4)}`),
    );
    const utilities = snap.per_stakeholder_utilities;
    const largest = Math.max(1e-9, ...utilities.map((u) => Math.abs(u.utility)));
    for (const member of utilities) {
      const row = el("div", { class: "bar-row", "data-testid": `utility-${member.id}` });
      const bar = el("div", { class: "bar" });
      bar.style.width = `${Math.round((Math.abs(member.utility) / largest) * 100)}%`;
      row.append(
        el("span", {}, `${member.id}: ${member.utility.toFixed(4)}`),
        bar,
      );
      this.juryPanel.append(row);
    }
  }

  private syncPosterior(state: ViewState): void {
    this.posteriorPanel.innerHTML = "";
    const snap = state.snapshot;
    if (!snap) return;
    const summary = snap.posterior_summary;
    const labels = state.momdp?.objective_labels ?? [];
    this.posteriorPanel.append(
      el(
        "div",
        { "data-testid": "posterior-stats" },
        `inferred weights | entropy ${summary.entropy.toFixed(3)} | ` +
          `peak ${summary.max_probability.toFixed(3)}`,
      ),
    );
    summary.mean.forEach((weight, i) => {
      const row = el("div", { class: "bar-row", "data-testid": `posterior-mean-${i}` });
      const bar = el("div", { class: "bar" });
      bar.style.width = `${Math.round(weight * 100)}%`;
      row.append(el("span", {}, `${labels[i] ?? i}: ${weight.toFixed(3)}`), bar);
      this.posteriorPanel.append(row);
    });
  }

  private syncGrid(state: ViewState): void {
    const view = state.snapshot?.grid_view ?? null;
    this.grid.classList.toggle("hidden", view === null);
    this.grid.innerHTML = "";
    if (!view) return;
    const walls = new Set(view.walls.map(([r, c]) => `${r},${c}`));
    const terminals = new Set(view.terminals.map(([r, c]) => `${r},${c}`));
    const [agentRow, agentCol] = view.agent;
    this.grid.style.gridTemplateColumns = `repeat(${view.cols}, 1.6em)`;
    for (let r = 0; r < view.rows; r += 1) {
      for (let c = 0; c < view.cols; c += 1) {
        const key = `${r},${c}`;
        let glyph = "";
        let cls = "cell";
        if (walls.has(key)) {
          cls += " wall";
        } else if (r === agentRow && c === agentCol) {
          glyph = "@";
          cls += " agent";
        } else if (terminals.has(key)) {
          glyph = "*";
        }
        this.grid.append(
          el("span", { class: cls, "data-testid": `cell-${r}-${c}` }, glyph),
        );
      }
    }
  }

  private syncFeed(state: ViewState): void {
    this.feed.innerHTML = "";
    for (const event of [...state.feed].reverse()) {
      this.feed.append(el("li", { class: `event ${event.tone}` }, event.text));
    }
  }
}
