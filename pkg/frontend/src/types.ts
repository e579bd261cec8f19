// DTOs for the review API (serve-review endpoints).

export type Label = "good" | "bad";

export interface Verdict {
  filter: string;
  passed: boolean;
  measured: number;
  threshold: string;
}

export interface PendingItem {
  id: string;
  source: string;
  crop: string;
  verdicts: Verdict[];
  ssim: number | null;
  kept: boolean;
  label: Label | null;
}

export interface PendingPage {
  items: PendingItem[];
  page: number;
  size: number;
  total: number;
}

export interface TriageResponse {
  items: PendingItem[];
  source: string | null;
}

export interface SourceSummary {
  id: string;
  status: string;
  n_post_nms: number;
  n_records: number;
}

export interface ExportLine {
  id: string;
  crop: string;
  label: Label;
}

export type PendingFilter = "unlabeled" | "all";
