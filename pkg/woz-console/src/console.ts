// Console state and interaction logic, kept free of DOM concerns so it
// can be unit-tested headlessly; src/main.ts binds it to the page.

import { EventFeed, ServiceClient, ServiceError } from "./api.js";
import { classifyZone } from "./zones.js";
import type {
  Act,
  ActType,
  Assessment,
  Induction,
  SessionEvent,
  Thresholds,
  Zone,
} from "./types.js";

export interface OverrideEntry {
  turn: number;
  recommended: ActType | null;
  chosen: ActType;
}

export interface ConsoleSnapshot {
  sessionId: string | null;
  status: string;
  feed: SessionEvent[];
  level: number;
  induction: Induction | null;
  zonePreview: Zone | null;
  assessment: Assessment | null;
  recommendation: Act | null;
  recommendationText: string;
  overrideLog: OverrideEntry[];
  warning: string | null;
  error: string | null;
  streamStatus: string;
}

export class WizardConsole {
  sessionId: string | null = null;
  thresholds: Thresholds | null = null;
  feed: SessionEvent[] = [];
  level = 0.5;
  induction: Induction | null = null;
  assessment: Assessment | null = null;
  recommendation: Act | null = null;
  recommendationFetched = false;
  overrideLog: OverrideEntry[] = [];
  warning: string | null = null;
  error: string | null = null;
  sessionStatus = "detached";
  streamStatus = "stopped";
  private feedHandle: EventFeed | null = null;

  constructor(
    private client: ServiceClient,
    private onChange: () => void = () => {},
  ) {}

  /** Join an existing session: fetch its config and go live on the feed. */
  async join(sessionId: string): Promise<void> {
    this.error = null;
    try {
      const info = await this.client.getSession(sessionId);
      this.sessionId = sessionId;
      this.thresholds = info.thresholds;
      this.sessionStatus = info.status;
      this.feed = [];
      this.overrideLog = [];
      this.feedHandle = new EventFeed(this.client, sessionId, {
        onEvent: (event) => {
          this.feed.push(event);
          this.onChange();
        },
        onStatus: (status) => {
          this.streamStatus = status;
          this.onChange();
        },
      });
      this.feedHandle.start();
    } catch (err) {
      this.error = describeError(err);
    }
    this.onChange();
  }

  leave(): void {
    this.feedHandle?.stop();
    this.feedHandle = null;
    this.sessionId = null;
    this.sessionStatus = "detached";
    this.onChange();
  }

  setLevel(level: number): void {
    this.level = level;
    this.onChange();
  }

  setInduction(induction: Induction | null): void {
    this.induction = induction;
    this.onChange();
  }

  /** Zone the slider value maps to, computed client-side. */
  get zonePreview(): Zone | null {
    if (!this.thresholds) return null;
    return classifyZone(this.level, this.thresholds);
  }

  /** True when submission would be rejected with a 422 (induction unset). */
  get inductionRequired(): boolean {
    return this.zonePreview !== "engaged" && this.induction === null;
  }

  /**
   * Post the current annotation, then refresh the recommendation panel.
   * One call is one wizard turn: observation in, recommended act out.
   */
  async submitAnnotation(): Promise<void> {
    if (!this.sessionId) return;
    if (this.inductionRequired) {
      this.error = "select an induction type before submitting";
      this.onChange();
      return;
    }
    this.error = null;
    this.warning = null;
    try {
      const assessment = await this.client.postObservation(
        this.sessionId,
        this.level,
        this.induction,
      );
      this.assessment = assessment;
      const preview = this.zonePreview;
      if (preview !== null && assessment.zone !== preview) {
        this.warning =
          `zone mismatch: console computed ${preview}, ` +
          `service returned ${assessment.zone}`;
      }
      this.recommendation = await this.client.nextAct(this.sessionId);
      this.recommendationFetched = true;
    } catch (err) {
      this.error = describeError(err);
    }
    this.onChange();
  }

  get recommendationText(): string {
    if (!this.recommendationFetched) return "submit an annotation";
    if (this.recommendation === null) return "no act needed";
    const act = this.recommendation;
    return `${act.act_type} (step ${act.step_index}): ${act.utterance}`;
  }

  /** Emit the wizard-chosen act instead of the recommended one. */
  async override(actType: ActType): Promise<void> {
    if (!this.sessionId) return;
    this.error = null;
    try {
      const act = await this.client.overrideAct(this.sessionId, actType);
      this.overrideLog.push({
        turn: this.feed.length,
        recommended: this.recommendation ? this.recommendation.act_type : null,
        chosen: act.act_type,
      });
      this.recommendation = null;
      this.recommendationFetched = false;
    } catch (err) {
      this.error = describeError(err);
    }
    this.onChange();
  }

  snapshot(): ConsoleSnapshot {
    return {
      sessionId: this.sessionId,
      status: this.sessionStatus,
      feed: [...this.feed],
      level: this.level,
      induction: this.induction,
      zonePreview: this.zonePreview,
      assessment: this.assessment,
      recommendation: this.recommendation,
      recommendationText: this.recommendationText,
      overrideLog: [...this.overrideLog],
      warning: this.warning,
      error: this.error,
      streamStatus: this.streamStatus,
    };
  }
}

function describeError(err: unknown): string {
  if (err instanceof ServiceError) {
    if (err.status === 404) return "session not found";
    return `${err.code}: ${JSON.stringify(err.detail)}`;
  }
  return err instanceof Error ? err.message : String(err);
}
