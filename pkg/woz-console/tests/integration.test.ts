// End-to-end wizard round trip against the real session service.
// Spawns `python3 -m mitigator.cli serve` from the sibling package; the
// console talks to it exactly as the browser build would.

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { WizardConsole } from "../src/console.js";

const PORT = 8750 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function waitFor(
  predicate: () => boolean | Promise<boolean>,
  timeoutMs = 10_000,
  what = "condition",
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (await predicate()) return;
    await new Promise((r) => setTimeout(r, 50));
  }
  throw new Error(`timed out waiting for ${what}`);
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "mitigator.cli", "serve", "--bind", `127.0.0.1:${PORT}`],
    { cwd: "..", stdio: ["ignore", "pipe", "pipe"] },
  );
  await waitFor(
    async () => {
      try {
        const resp = await fetch(`${BASE}/policies/builtin`);
        return resp.ok;
      } catch {
        return false;
      }
    },
    15_000,
    "service startup",
  );
}, 20_000);

afterAll(() => {
  server?.kill();
});

describe("woz round trip", () => {
  it("annotate, recommend, override, and feed matches transcript", async () => {
    const client = new ServiceClient(BASE);
    const sessionId = await client.createSession();

    const console_ = new WizardConsole(client);
    await console_.join(sessionId);
    expect(console_.error).toBeNull();
    expect(console_.thresholds).toEqual({ t_a: 0.3, t_b: 0.7 });

    // Annotate 0.5 + complex_information: productive zone, and the
    // builtin policy recommends an information supplement.
    console_.setLevel(0.5);
    console_.setInduction("complex_information");
    await console_.submitAnnotation();
    expect(console_.assessment?.zone).toBe("productive_confusion");
    expect(console_.warning).toBeNull();
    expect(console_.recommendation?.act_type).toBe("information_supplement");

    // The wizard overrides with a subject change.
    await console_.override("subject_change");
    expect(console_.error).toBeNull();
    expect(console_.overrideLog).toHaveLength(1);
    expect(console_.overrideLog[0].chosen).toBe("subject_change");

    // The live feed shows the overridden act...
    await waitFor(
      () =>
        console_.feed.some(
          (e) =>
            e.kind === "act_emitted" &&
            e.payload["act_type"] === "subject_change" &&
            e.payload["overridden"] === true,
        ),
      10_000,
      "overridden act on the feed",
    );

    // ...and matches the server transcript event-for-event.
    const transcript = await client.transcript(sessionId);
    await waitFor(
      () => console_.feed.length === transcript.length,
      10_000,
      "feed to catch up with transcript",
    );
    expect(console_.feed).toEqual(transcript);

    console_.leave();
  }, 30_000);

  it("engaged annotation yields no recommendation", async () => {
    const client = new ServiceClient(BASE);
    const sessionId = await client.createSession();
    const console_ = new WizardConsole(client);
    await console_.join(sessionId);
    console_.setLevel(0.1);
    await console_.submitAnnotation();
    expect(console_.error).toBeNull();
    expect(console_.recommendationText).toBe("no act needed");
    console_.leave();
  }, 15_000);

  it("joining a bad session id surfaces an error, no crash", async () => {
    const console_ = new WizardConsole(new ServiceClient(BASE));
    await console_.join("does-not-exist");
    expect(console_.error).toBe("session not found");
  }, 15_000);

  it("reconnect loses no events: fresh catch-up equals full fetch", async () => {
    const client = new ServiceClient(BASE);
    const sessionId = await client.createSession();
    const console_ = new WizardConsole(client);
    await console_.join(sessionId);
    console_.setLevel(0.8);
    console_.setInduction("false_feedback");
    await console_.submitAnnotation();
    await waitFor(() => console_.feed.length >= 2, 10_000, "initial feed");

    // Simulate a blip: drop the stream, do more turns, rejoin from zero.
    console_.leave();
    console_.setLevel(0.9);
    await client.postObservation(sessionId, 0.9, "false_feedback");
    await client.nextAct(sessionId);

    const transcript = await client.transcript(sessionId);
    const rejoined = new WizardConsole(client);
    await rejoined.join(sessionId);
    await waitFor(
      () => rejoined.feed.length === transcript.length,
      10_000,
      "rejoined feed",
    );
    expect(rejoined.feed).toEqual(transcript);
    rejoined.leave();
  }, 20_000);
});
