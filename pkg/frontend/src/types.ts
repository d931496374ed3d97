/**
 * Wire types for the explanation service JSON API.
 *
 * These mirror the payloads the service actually emits; the console never
 * invents fields of its own.
 */

export type TimedEvent =
  | { t: number; kind: "env"; pred: string; value: boolean }
  | { t: number; kind: "broadcast"; chan: string; val: number }
  | { t: number; kind: "advance"; delta: number }
  | { t: number; kind: "action"; name: string; obs_kind?: string };

export interface BeliefConfig {
  location: string;
  location_name: string;
  clocks: Record<string, number>;
  vars: Record<string, number>;
}

export interface SessionFlags {
  novel_situation: boolean;
  frozen: boolean;
  pending_explanation: boolean;
}

export interface SessionInfo {
  id: string;
  created_at: string;
  explainee: string;
  time: number;
  belief: BeliefConfig[];
  flags: SessionFlags;
  warnings: string[];
}

export interface TakenTransition {
  timestamp: number;
  transition: string;
  values: Record<string, unknown>;
  observables: { kind: string; name: string }[];
}

export interface ExplanationNeed {
  observable: string;
  kind: string;
  name: string;
  occurrence: { timestamp: number; transition: string };
}

export interface StepReport {
  time: number;
  belief: BeliefConfig[];
  taken: TakenTransition[];
  flags: SessionFlags;
  explanation_need: ExplanationNeed | null;
}

export interface Annotation {
  snippet: string;
  rule?: string;
}

export interface ReasonInstance {
  element_id: string;
  kind: string;
  text: string;
  values: Record<string, unknown>;
  annotation: Annotation | null;
}

export interface ChainPair {
  transition: string;
  timestamp: number;
  observables: string[];
  reasons: ReasonInstance[];
}

export interface ExplanationPath {
  observable: string;
  kind: string;
  name: string;
  occurrence: { timestamp: number; transition: string };
  reasons: ReasonInstance[];
  back_chain: ChainPair[];
  rendered_how: string;
  rendered_why: string[];
  rendered: string;
}

export interface HelpfulAck {
  kind: "helpful";
  recorded: boolean;
  feedback_count: number;
}

export interface VisibilitySummary {
  node: string;
  element_id: string;
  user_hidden: boolean;
  reveal_depth: number;
  visible_elements: number;
  revealed: string[];
}

export type FeedbackResult = HelpfulAck | VisibilitySummary;

export interface LookaheadEntry {
  kind: string;
  name: string;
  observable: string;
  earliest: number;
  witness: string[];
}

export interface LookaheadReport {
  horizon: number;
  results: LookaheadEntry[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

export function isApiError(body: unknown): body is ApiErrorBody {
  return (
    typeof body === "object" &&
    body !== null &&
    typeof (body as ApiErrorBody).code === "string" &&
    typeof (body as ApiErrorBody).message === "string"
  );
}
