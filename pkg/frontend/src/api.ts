// Types mirroring the server's JSON payloads, plus thin fetch wrappers.
// The console never synthesizes data: everything rendered comes from these.

export interface Correction {
  stage: string;
  description: string;
  before: string;
  after: string;
}

export interface UnresolvedDefect {
  kind: string;
  detail: string;
}

export interface RepairReport {
  input_query: string;
  output_query: string;
  corrections: Correction[];
  unresolved: UnresolvedDefect[];
}

export interface StageFailure {
  stage: string;
  message: string;
}

export interface PipelineTrace {
  question: string;
  template_id: string;
  model_name: string;
  rendered_prompt: string;
  raw_llm_output: string;
  extracted_cypher: string | null;
  repair_report: RepairReport | null;
  executed_query: string | null;
  results: string[];
  answer_sentence: string | null;
  failure: StageFailure | null;
}

export interface SchemaTriple {
  source: string;
  relation: string;
  target: string;
}

export interface SchemaInfo {
  text: string;
  labels: string[];
  triples: SchemaTriple[];
  bidirectional_self_relations: string[];
}

export interface AskPayload {
  question: string;
  model: string;
  template_id: string;
  generate_sentence: boolean;
}

async function getJson<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  if (!resp.ok) {
    throw new Error(`GET ${url} failed: ${resp.status}`);
  }
  return (await resp.json()) as T;
}

export async function fetchModels(base = ""): Promise<string[]> {
  const body = await getJson<{ models: string[] }>(`${base}/api/models`);
  return body.models;
}

export async function fetchTemplates(base = ""): Promise<string[]> {
  const body = await getJson<{ templates: { id: string }[] }>(`${base}/api/templates`);
  return body.templates.map((t) => t.id);
}

export async function fetchSchema(base = ""): Promise<SchemaInfo> {
  return getJson<SchemaInfo>(`${base}/api/schema`);
}

export async function ask(payload: AskPayload, base = ""): Promise<PipelineTrace> {
  const resp = await fetch(`${base}/api/ask`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (!resp.ok) {
    let detail = `${resp.status}`;
    try {
      const body = await resp.json();
      if (body && body.detail) {
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
      }
    } catch {
      // keep the status code
    }
    throw new Error(`ask failed: ${detail}`);
  }
  return (await resp.json()) as PipelineTrace;
}
