// DOM wiring: one in-flight request at a time; the page re-renders as a pure
// function of the last trace plus form state.

import { ask, AskPayload, fetchModels, fetchSchema, fetchTemplates, PipelineTrace } from "./api.js";
import { escapeHtml } from "./diff.js";
import {
  buildAnswerSentence,
  buildCorrectionList,
  buildFailureBanner,
  buildQueryPanels,
  buildResultsTable,
  buildSchemaPanel,
  buildUnresolvedList,
} from "./render.js";

interface ViewState {
  inFlight: boolean;
  trace: PipelineTrace | null;
  error: string | null;
}

const state: ViewState = { inFlight: false, trace: null, error: null };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function setOptions(select: HTMLSelectElement, values: string[]): void {
  select.innerHTML = values
    .map((v) => `<option value="${escapeHtml(v)}">${escapeHtml(v)}</option>`)
    .join("");
}

function renderTrace(): void {
  const out = el<HTMLDivElement>("trace-output");
  const errorBox = el<HTMLDivElement>("error-box");
  errorBox.innerHTML = state.error
    ? `<div class="banner banner-failure">${escapeHtml(state.error)}</div>`
    : "";
  if (!state.trace) {
    out.innerHTML = "";
    return;
  }
  const trace = state.trace;
  const panels = buildQueryPanels(trace);
  out.innerHTML = `
    ${buildFailureBanner(trace)}
    <div class="columns">
      <section>
        <h3>generated query</h3>
        <pre class="query" id="raw-query">${panels.rawHtml}</pre>
      </section>
      <section>
        <h3>corrected query</h3>
        <pre class="query" id="corrected-query">${panels.correctedHtml}</pre>
      </section>
    </div>
    <section>
      <h3>corrections</h3>
      ${buildCorrectionList(trace)}
      ${buildUnresolvedList(trace)}
    </section>
    <section>
      <h3>results</h3>
      ${buildResultsTable(trace)}
      ${buildAnswerSentence(trace)}
    </section>
    <details>
      <summary>raw model output</summary>
      <pre>${escapeHtml(trace.raw_llm_output)}</pre>
    </details>
  `;
}

function setInFlight(inFlight: boolean): void {
  state.inFlight = inFlight;
  el<HTMLButtonElement>("submit").disabled = inFlight;
  el<HTMLInputElement>("question").disabled = inFlight;
  el<HTMLSelectElement>("model").disabled = inFlight;
  el<HTMLSelectElement>("template").disabled = inFlight;
}

export function buildAskPayload(
  question: string,
  model: string,
  template: string,
  generateSentence: boolean,
): AskPayload {
  return {
    question: question.trim(),
    model,
    template_id: template,
    generate_sentence: generateSentence,
  };
}

async function submitQuestion(): Promise<void> {
  if (state.inFlight) {
    return;
  }
  const question = el<HTMLInputElement>("question").value;
  if (!question.trim()) {
    state.error = "type a question first";
    renderTrace();
    return;
  }
  const payload = buildAskPayload(
    question,
    el<HTMLSelectElement>("model").value,
    el<HTMLSelectElement>("template").value,
    el<HTMLInputElement>("sentence").checked,
  );
  setInFlight(true);
  state.error = null;
  try {
    state.trace = await ask(payload);
  } catch (err) {
    state.error = err instanceof Error ? err.message : String(err);
  } finally {
    setInFlight(false);
    renderTrace();
  }
}

async function toggleSchema(): Promise<void> {
  const panel = el<HTMLDivElement>("schema-panel");
  if (panel.dataset.loaded === "yes") {
    panel.hidden = !panel.hidden;
    return;
  }
  try {
    const schema = await fetchSchema();
    panel.innerHTML = buildSchemaPanel(schema);
    panel.dataset.loaded = "yes";
    panel.hidden = false;
  } catch (err) {
    panel.innerHTML = `<div class="banner banner-failure">${escapeHtml(String(err))}</div>`;
    panel.hidden = false;
  }
}

async function init(): Promise<void> {
  try {
    setOptions(el<HTMLSelectElement>("model"), await fetchModels());
    setOptions(el<HTMLSelectElement>("template"), await fetchTemplates());
  } catch (err) {
    state.error = `could not reach the server: ${String(err)}`;
    renderTrace();
  }
  el<HTMLButtonElement>("submit").addEventListener("click", () => void submitQuestion());
  el<HTMLInputElement>("question").addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void submitQuestion();
    }
  });
  el<HTMLButtonElement>("schema-toggle").addEventListener("click", () => void toggleSchema());
}

if (typeof document !== "undefined") {
  void init();
}
