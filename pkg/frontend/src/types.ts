/** Payload shapes of the review service API. */

export interface ImageAsset {
  id: string;
  path: string;
  width: number;
  height: number;
  role: "question" | "solution";
}

export interface Sample {
  id: string;
  language: "en" | "zh";
  subset: "text" | "multimodal";
  question_md: string;
  solution_md: string;
  question_images: ImageAsset[];
  solution_images: ImageAsset[];
  qtype: { parts: "single" | "multipart"; answer: "multiple_choice" | "answer_based" | "proof_based" };
  knowledge: { root: string; sub: string; point: string } | null;
  benchmark_eligible: boolean;
}

export interface SampleMeta {
  sample_id: string;
  scoring_points: Record<string, string>;
  point_values: Record<string, number>;
  total_answer: number;
  answer_summary: Record<string, string>;
  max_score: number;
  verified: boolean;
}

export type ReviewStatus = "pending" | "approved" | "flagged";

export type FlagReason =
  | "trivial_visual_reasoning"
  | "answer_mismatch"
  | "bad_scoring_points"
  | "other";

export const FLAG_REASONS: FlagReason[] = [
  "trivial_visual_reasoning",
  "answer_mismatch",
  "bad_scoring_points",
  "other",
];

export interface QueueItem {
  sample: Sample;
  meta: SampleMeta | null;
  status: ReviewStatus;
  revision: number;
}

export interface QueuePage {
  items: QueueItem[];
  page: number;
  page_size: number;
  total: number;
}

export interface SampleDetail {
  sample: Sample;
  meta: SampleMeta | null;
  status: ReviewStatus;
  revision: number;
  images: { question: string[]; solution: string[] };
}

export interface ReviewBody {
  reviewer_id: string;
  verdict: "approved" | "flagged";
  revision: number;
  flag_reason?: FlagReason;
  flag_note?: string;
  edited_meta?: SampleMeta;
}

export interface ReviewResult {
  sample_id: string;
  revision: number;
  status: ReviewStatus;
}

export interface TraceSegment {
  kind: "text" | "code" | "figure" | "final_answer";
  payload: string;
  origin: "model" | "sandbox";
  index: number;
  unterminated: boolean;
  url?: string;
}

export interface TraceRecord {
  sample_id: string;
  model_id: string;
  truncated: boolean;
  wall_time: number;
  token_usage: { text_tokens: number; code_tokens: number; figures: number };
  segments: TraceSegment[];
  exec_results: { status: string; figures: string[]; stdout: string; stderr: string; duration: number }[];
}
