// Pure HTML-string builders: the page is a function of the last trace plus
// form state. Nothing here touches the DOM or the network.

import { PipelineTrace, SchemaInfo } from "./api.js";
import { escapeHtml, highlightFragments } from "./diff.js";

export interface QueryPanels {
  rawHtml: string;
  correctedHtml: string;
  rawHighlights: number;
  correctedHighlights: number;
}

/** Side-by-side query panels with one highlight per correction on each side.
 * SyntaxReturn fragments are located from the end of the text, where the
 * RETURN clause lives, so short fragments like `dr` land on the right spot. */
export function buildQueryPanels(trace: PipelineTrace): QueryPanels {
  const report = trace.repair_report;
  const rawText = trace.extracted_cypher ?? "";
  if (!report) {
    return {
      rawHtml: escapeHtml(rawText),
      correctedHtml: "",
      rawHighlights: 0,
      correctedHighlights: 0,
    };
  }
  const fromEnd = report.corrections.map((c) => c.stage === "SyntaxReturn");
  const raw = highlightFragments(
    report.input_query,
    report.corrections.map((c) => c.before),
    fromEnd,
  );
  const corrected = highlightFragments(
    report.output_query,
    report.corrections.map((c) => c.after),
    fromEnd,
  );
  return {
    rawHtml: raw.html,
    correctedHtml: corrected.html,
    rawHighlights: raw.matched,
    correctedHighlights: corrected.matched,
  };
}

export function buildCorrectionList(trace: PipelineTrace): string {
  const report = trace.repair_report;
  if (!report) {
    return "";
  }
  if (report.corrections.length === 0) {
    return '<p class="badge badge-ok">no corrections needed</p>';
  }
  const rows = report.corrections
    .map(
      (c, i) =>
        `<li data-correction="${i}"><span class="stage">${escapeHtml(c.stage)}</span> ` +
        `${escapeHtml(c.description)}<br>` +
        `<code class="frag-before">${escapeHtml(c.before)}</code> &rarr; ` +
        `<code class="frag-after">${escapeHtml(c.after)}</code></li>`,
    )
    .join("");
  return `<ol class="corrections">${rows}</ol>`;
}

export function buildUnresolvedList(trace: PipelineTrace): string {
  const report = trace.repair_report;
  if (!report || report.unresolved.length === 0) {
    return "";
  }
  const rows = report.unresolved
    .map(
      (d) =>
        `<li><span class="kind">${escapeHtml(d.kind)}</span> ${escapeHtml(d.detail)}</li>`,
    )
    .join("");
  return `<ul class="unresolved">${rows}</ul>`;
}

export function buildFailureBanner(trace: PipelineTrace): string {
  if (!trace.failure) {
    return "";
  }
  return (
    `<div class="banner banner-failure">pipeline stopped at the ` +
    `<strong>${escapeHtml(trace.failure.stage)}</strong> stage: ` +
    `${escapeHtml(trace.failure.message)}</div>`
  );
}

export function buildResultsTable(trace: PipelineTrace): string {
  if (trace.failure && trace.results.length === 0) {
    return "";
  }
  if (trace.results.length === 0) {
    return '<p class="badge">the query returned no results</p>';
  }
  const rows = trace.results
    .map((value) => `<tr><td>${escapeHtml(value)}</td></tr>`)
    .join("");
  return `<table class="results"><tbody>${rows}</tbody></table>`;
}

export function buildAnswerSentence(trace: PipelineTrace): string {
  if (!trace.answer_sentence) {
    return "";
  }
  return `<blockquote class="answer">${escapeHtml(trace.answer_sentence)}</blockquote>`;
}

export function buildSchemaPanel(schema: SchemaInfo): string {
  if (schema.labels.length === 0) {
    return '<p class="badge">the graph schema is empty</p>';
  }
  const chips = schema.labels
    .map((label) => `<span class="chip">${escapeHtml(label)}</span>`)
    .join(" ");
  const triples = schema.triples
    .map(
      (t) =>
        `<li><code>(:${escapeHtml(t.source)})-[:${escapeHtml(t.relation)}]-&gt;` +
        `(:${escapeHtml(t.target)})</code></li>`,
    )
    .join("");
  return (
    `<div class="chips">${chips}</div>` +
    `<ul class="triples">${triples}</ul>`
  );
}
