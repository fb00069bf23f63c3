// Client-side mirror of the service's zone classification, used for the
// live zone preview under the annotation slider. The thresholds come from
// the joined session; any disagreement with a server assessment is a bug
// and the console surfaces it as a warning banner.

import type { ActType, Thresholds, Zone } from "./types.js";

export function classifyZone(level: number, thresholds: Thresholds): Zone {
  if (level < 0 || level > 1) {
    throw new RangeError(`confusion level out of range: ${level}`);
  }
  if (level < thresholds.t_a) return "engaged";
  // Both boundary values count as productive confusion.
  if (level <= thresholds.t_b) return "productive_confusion";
  return "unproductive_confusion";
}

export interface ActInfo {
  actType: ActType;
  name: string;
  description: string;
}

// The seven mitigation acts in canonical order, with the descriptions
// shown in the override menu.
export const ACT_CATALOG: ActInfo[] = [
  {
    actType: "restatement",
    name: "Restatement",
    description: "The agent repeats the information or question.",
  },
  {
    actType: "feedback_request",
    name: "FeedbackRequest",
    description: "The agent asks for the participant's feedback and response.",
  },
  {
    actType: "information_extension",
    name: "InformationExtension",
    description:
      "The agent provides more information to expand on the information or question already raised.",
  },
  {
    actType: "information_supplement",
    name: "InformationSupplement",
    description:
      "The agent provides comprehensive information or questions in different ways" +
      " for participants to quickly understand easily.",
  },
  {
    actType: "response_correction",
    name: "ResponseCorrection",
    description:
      "The agent provides the appropriate response in order to avoid confusion states on the participant.",
  },
  {
    actType: "confirmation",
    name: "Confirmation",
    description:
      "The agent admits that the information or question has one or more issues" +
      " leading to the participant being confused.",
  },
  {
    actType: "subject_change",
    name: "SubjectChange",
    description: "The agent changes straightforward questions or other topics.",
  },
];

export function actInfo(actType: ActType): ActInfo {
  const info = ACT_CATALOG.find((a) => a.actType === actType);
  if (!info) throw new Error(`unknown act type: ${actType}`);
  return info;
}
