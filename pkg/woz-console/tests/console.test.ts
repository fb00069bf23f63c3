import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ServiceClient, ServiceError } from "../src/api.js";
import { WizardConsole } from "../src/console.js";
import type { Act, Assessment, SessionInfo } from "../src/types.js";

const INFO: SessionInfo = {
  session_id: "s1",
  policy_name: "default",
  status: "idle",
  end_reason: null,
  thresholds: { t_a: 0.3, t_b: 0.7 },
  limits: { frustration_after: 2, boredom_after: 4, disengage_after: 6 },
  assessment: { level: 0, zone: "engaged", affect: "engagement", persistence_turns: 0 },
};

// Stand-in client: canned responses, no network. The event stream is
// stubbed via global fetch with a never-ending empty body.
function fakeClient(overrides: Partial<ServiceClient> = {}): ServiceClient {
  const client = new ServiceClient("http://fake");
  client.getSession = async () => INFO;
  client.postObservation = async (_sid, level) =>
    ({
      level,
      zone: level < 0.3 ? "engaged" : level <= 0.7 ? "productive_confusion" : "unproductive_confusion",
      affect: "confusion",
      persistence_turns: 0,
    }) as Assessment;
  client.nextAct = async () =>
    ({
      act_type: "information_supplement",
      utterance: "Let me explain this differently.",
      step_index: 0,
      policy_id: "productive/complex_information",
    }) as Act;
  client.overrideAct = async (_sid, actType) =>
    ({
      act_type: actType,
      utterance: "x",
      step_index: 0,
      policy_id: "productive/complex_information",
      overridden: true,
    }) as Act;
  client.transcript = async () => [];
  return Object.assign(client, overrides);
}

beforeEach(() => {
  vi.stubGlobal(
    "fetch",
    vi.fn(async (_url: string, init?: RequestInit) => {
      // An SSE stream that stays open until the feed aborts it.
      const body = new ReadableStream<Uint8Array>({
        start(controller) {
          init?.signal?.addEventListener("abort", () => {
            try {
              controller.close();
            } catch {}
          });
        },
      });
      return { ok: true, status: 200, body } as Response;
    }),
  );
});

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("WizardConsole", () => {
  it("join fetches thresholds and enables the zone preview", async () => {
    const console_ = new WizardConsole(fakeClient());
    await console_.join("s1");
    expect(console_.thresholds).toEqual({ t_a: 0.3, t_b: 0.7 });
    console_.setLevel(0.5);
    expect(console_.zonePreview).toBe("productive_confusion");
    console_.setLevel(0.1);
    expect(console_.zonePreview).toBe("engaged");
    console_.leave();
  });

  it("join with unknown id shows an error banner and does not crash", async () => {
    const client = fakeClient({
      getSession: async () => {
        throw new ServiceError(404, "unknown_session", "nope");
      },
    });
    const console_ = new WizardConsole(client);
    await console_.join("nope");
    expect(console_.error).toBe("session not found");
    expect(console_.sessionId).toBeNull();
  });

  it("blocks submission when induction is required but unset", async () => {
    const client = fakeClient();
    const spy = vi.spyOn(client, "postObservation");
    const console_ = new WizardConsole(client);
    await console_.join("s1");
    console_.setLevel(0.5);
    await console_.submitAnnotation();
    expect(spy).not.toHaveBeenCalled();
    expect(console_.error).toMatch(/induction/);
    console_.leave();
  });

  it("annotation updates assessment and recommendation panel", async () => {
    const console_ = new WizardConsole(fakeClient());
    await console_.join("s1");
    console_.setLevel(0.5);
    console_.setInduction("complex_information");
    await console_.submitAnnotation();
    expect(console_.assessment?.zone).toBe("productive_confusion");
    expect(console_.recommendation?.act_type).toBe("information_supplement");
    expect(console_.warning).toBeNull();
    console_.leave();
  });

  it("engaged level shows 'no act needed'", async () => {
    const client = fakeClient({ nextAct: async () => null });
    const console_ = new WizardConsole(client);
    await console_.join("s1");
    console_.setLevel(0.1);
    await console_.submitAnnotation();
    expect(console_.recommendationText).toBe("no act needed");
    console_.leave();
  });

  it("warns when the server zone diverges from the preview", async () => {
    const client = fakeClient({
      postObservation: async () =>
        ({
          level: 0.5,
          zone: "unproductive_confusion",
          affect: "confusion",
          persistence_turns: 0,
        }) as Assessment,
    });
    const console_ = new WizardConsole(client);
    await console_.join("s1");
    console_.setLevel(0.5);
    console_.setInduction("complex_information");
    await console_.submitAnnotation();
    expect(console_.warning).toMatch(/zone mismatch/);
    console_.leave();
  });

  it("override records recommended vs chosen in the log", async () => {
    const console_ = new WizardConsole(fakeClient());
    await console_.join("s1");
    console_.setLevel(0.5);
    console_.setInduction("complex_information");
    await console_.submitAnnotation();
    await console_.override("subject_change");
    expect(console_.overrideLog).toEqual([
      { turn: 0, recommended: "information_supplement", chosen: "subject_change" },
    ]);
    expect(console_.recommendation).toBeNull();
    console_.leave();
  });
});
