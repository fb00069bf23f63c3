// DOM layer: binds WizardConsole to the static page in public/index.html.
// Service URL comes from ?service=... or defaults to same-origin port 8750.

import { ServiceClient } from "./api.js";
import { WizardConsole } from "./console.js";
import { ACT_CATALOG } from "./zones.js";
import type { ActType, Induction } from "./types.js";

const params = new URLSearchParams(window.location.search);
const serviceUrl =
  params.get("service") || `${window.location.protocol}//${window.location.hostname}:8750`;

const client = new ServiceClient(serviceUrl);
const consoleState = new WizardConsole(client, render);

const $ = (id: string) => document.getElementById(id)!;

function render() {
  const snap = consoleState.snapshot();
  $("session-status").textContent = snap.sessionId
    ? `session ${snap.sessionId} — ${snap.status} (stream ${snap.streamStatus})`
    : "not joined";
  $("zone-preview").textContent = snap.zonePreview ?? "—";
  $("zone-preview").className = `zone zone-${snap.zonePreview ?? "none"}`;
  $("level-value").textContent = snap.level.toFixed(2);
  $("recommendation").textContent = snap.recommendationText;

  const banner = $("banner");
  if (snap.error) {
    banner.textContent = snap.error;
    banner.className = "banner error";
  } else if (snap.warning) {
    banner.textContent = snap.warning;
    banner.className = "banner warning";
  } else {
    banner.className = "banner hidden";
  }

  const feed = $("feed");
  feed.innerHTML = "";
  for (const event of snap.feed) {
    const row = document.createElement("li");
    const overridden = event.payload["overridden"] === true ? " [override]" : "";
    row.textContent = `t${event.turn} ${event.kind}${overridden} ${JSON.stringify(event.payload)}`;
    feed.appendChild(row);
  }
  feed.scrollTop = feed.scrollHeight;

  const log = $("override-log");
  log.innerHTML = "";
  for (const entry of snap.overrideLog) {
    const row = document.createElement("li");
    row.textContent = `turn ${entry.turn}: ${entry.recommended ?? "(none)"} → ${entry.chosen}`;
    log.appendChild(row);
  }
}

function populateMenus() {
  const overrideMenu = $("override-menu") as HTMLSelectElement;
  for (const act of ACT_CATALOG) {
    const option = document.createElement("option");
    option.value = act.actType;
    option.textContent = `${act.name} — ${act.description}`;
    overrideMenu.appendChild(option);
  }
}

function wire() {
  $("join-btn").addEventListener("click", () => {
    const id = ($("session-id") as HTMLInputElement).value.trim();
    if (id) void consoleState.join(id);
  });
  $("new-session-btn").addEventListener("click", async () => {
    const id = await client.createSession();
    ($("session-id") as HTMLInputElement).value = id;
    void consoleState.join(id);
  });
  $("level-slider").addEventListener("input", (e) => {
    consoleState.setLevel(parseFloat((e.target as HTMLInputElement).value));
  });
  $("induction-select").addEventListener("change", (e) => {
    const value = (e.target as HTMLSelectElement).value;
    consoleState.setInduction(value ? (value as Induction) : null);
  });
  $("submit-btn").addEventListener("click", () => void consoleState.submitAnnotation());
  $("override-btn").addEventListener("click", () => {
    const menu = $("override-menu") as HTMLSelectElement;
    void consoleState.override(menu.value as ActType);
  });
}

populateMenus();
wire();
render();
