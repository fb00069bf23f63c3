// Wire types for the session service JSON API.

export type Zone = "engaged" | "productive_confusion" | "unproductive_confusion";

export type Affect =
  | "engagement"
  | "confusion"
  | "frustration"
  | "boredom"
  | "disengaged";

export type Induction =
  | "complex_information"
  | "contradictory_information"
  | "insufficient_information"
  | "false_feedback";

export type ActType =
  | "restatement"
  | "feedback_request"
  | "information_extension"
  | "information_supplement"
  | "response_correction"
  | "confirmation"
  | "subject_change";

export interface Thresholds {
  t_a: number;
  t_b: number;
}

export interface Assessment {
  level: number;
  zone: Zone;
  affect: Affect;
  persistence_turns: number;
}

export interface SessionInfo {
  session_id: string;
  policy_name: string;
  status: string;
  end_reason: string | null;
  thresholds: Thresholds;
  limits: {
    frustration_after: number;
    boredom_after: number;
    disengage_after: number;
  };
  assessment: Assessment;
}

export interface Act {
  act_type: ActType;
  utterance: string;
  step_index: number;
  policy_id: string;
  overridden?: boolean;
}

export interface SessionEvent {
  turn: number;
  kind: string;
  payload: Record<string, unknown>;
  timestamp_ms: number;
}

export interface ApiError {
  error: string;
  detail: unknown;
}
