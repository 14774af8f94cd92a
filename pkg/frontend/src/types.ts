/** Shapes of the gateway's JSON documents, as the console consumes them. */

export interface ConsoleConfig {
  gateway_base_url: string;
}

export interface ValidationIssue {
  severity: string;
  field_path: string;
  message: string;
}

export interface GatewayErrorDoc {
  code: string;
  message: string;
  field_path?: string;
  issues?: ValidationIssue[];
}

export interface SearchHit {
  id: string;
  kind: string;
  resource_name: string;
  status: string;
  version: number;
  description?: string;
  languages?: string[];
  service_class?: string;
  function?: string;
}

export interface SearchResponse {
  total: number;
  offset: number;
  limit: number;
  hits: SearchHit[];
  facet_counts: Record<string, Record<string, number>>;
}

export interface ServiceSummary {
  service_id: string;
  service_class: string;
  record_id: string;
  conformance: string;
  restricted: boolean;
}

export type Scalar = string | number | boolean;

export interface AudioFormatDoc {
  encoding: string;
  sample_rate: number;
  channels: number;
}

export interface AudioDoc {
  format: AudioFormatDoc;
  payload: string; // base64
}

export interface AnnotationDoc {
  start: number;
  end: number;
  features?: Record<string, Scalar>;
}

export interface TextItemDoc {
  content: string;
  role?: string;
  score?: number;
}

export interface ClassScoreDoc {
  label: string;
  score: number;
}

export interface FailureItemDoc {
  code: string;
  message: string;
}

export interface RequestEnvelope {
  kind: "text" | "audio";
  content?: string;
  audio?: AudioDoc;
  params?: Record<string, Scalar>;
}

export interface ResponseEnvelope {
  kind: "texts" | "annotations" | "classification" | "audio" | "failure";
  texts?: TextItemDoc[];
  annotations?: Record<string, AnnotationDoc[]>;
  classes?: ClassScoreDoc[];
  audio?: AudioDoc;
  failure?: FailureItemDoc[];
}

export interface TokenGrant {
  token: string;
  subject: string;
  roles: string[];
}
