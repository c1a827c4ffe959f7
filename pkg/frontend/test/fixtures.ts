/**
 * Shared payload fixtures: the login page whose control migrates from an
 * anchor to a button, changing five attributes, plus small synthetic
 * payloads for grouping edge cases.
 */

import type { ChangeGroup, GroupsPayload, Occurrence, Report, Signature } from "../src/api.js";

const LOGIN_OCCURRENCE: Occurrence = {
  test_id: "login",
  step_name: "landing",
  handle: "#2",
  actual_handle: "#2",
};

function loginSignature(key: string, expected: string | null, actual: string | null): Signature {
  return { identity: [["id", "login"]], key, expected, actual };
}

export const LOGIN_CHANGES: [string, string | null, string | null][] = [
  ["background-color", "#047bf8", "#292b2c"],
  ["href", "/app.html", null],
  ["onclick", null, "login()"],
  ["text", "Sign in", "Log in"],
  ["type", "a", "button"],
];

export function loginGroupsPayload(): GroupsPayload {
  const groups: ChangeGroup[] = LOGIN_CHANGES.map(([key, expected, actual], index) => ({
    index,
    signature: loginSignature(key, expected, actual),
    count: 1,
    occurrences: [LOGIN_OCCURRENCE],
  }));
  return { groups, pending: groups.length };
}

export function loginReport(): Report {
  return {
    test_id: "login",
    step_name: "landing",
    status: "differences",
    strategy: "matching",
    deleted: [],
    created: [],
    attribute_diffs: [
      {
        handle: "#2",
        actual_handle: "#2",
        element: {
          handle: "#2",
          type: "a",
          attributes: {
            id: "login",
            type: "a",
            text: "Sign in",
            x: "560",
            y: "320",
            width: "160",
            height: "40",
          },
          attribute_count: 10,
        },
        changes: LOGIN_CHANGES.map(([key, expected, actual]) => ({ key, expected, actual })),
      },
    ],
    metrics: {
      expected_elements: 3,
      actual_elements: 3,
      deleted: 0,
      created: 0,
      maintained: 3,
      duration_ms: 1.0,
    },
  };
}

/** Two elements, three signatures: text on one element occurs 3 times. */
export function mixedGroupsPayload(): GroupsPayload {
  return {
    pending: 3,
    groups: [
      {
        index: 0,
        signature: { identity: [["id", "login"]], key: "text", expected: "Sign in", actual: "Log in" },
        count: 3,
        occurrences: [
          LOGIN_OCCURRENCE,
          { test_id: "login", step_name: "form", handle: "#4", actual_handle: "#4" },
          { test_id: "admin", step_name: "landing", handle: "#2", actual_handle: "#2" },
        ],
      },
      {
        index: 1,
        signature: { identity: [["id", "login"]], key: "type", expected: "a", actual: "button" },
        count: 1,
        occurrences: [LOGIN_OCCURRENCE],
      },
      {
        index: 2,
        signature: { identity: [["id", "logo"]], key: "width", expected: "90", actual: "120" },
        count: 1,
        occurrences: [{ test_id: "login", step_name: "landing", handle: "#1", actual_handle: "#1" }],
      },
    ],
  };
}

/** Browser snapshot bytes for the login page, before or after the change. */
export function loginSnapshot(phase: "before" | "after"): string {
  const control =
    phase === "before"
      ? {
          path: "/html[1]/body[1]/a[1]",
          html: { id: "login", href: "/app.html", class: "btn btn-primary" },
          css: { "background-color": "#047bf8" },
          rect: { x: 560, y: 320, w: 160, h: 40 },
          text: "Sign in",
        }
      : {
          path: "/html[1]/body[1]/button[1]",
          html: { id: "login", onclick: "login()", class: "btn btn-primary" },
          css: { "background-color": "#292b2c" },
          rect: { x: 560, y: 320, w: 160, h: 40 },
          text: "Log in",
        };
  return JSON.stringify({
    nodes: [
      { path: "/html[1]", html: { lang: "en" }, rect: { x: 0, y: 0, w: 1280, h: 800 } },
      { path: "/html[1]/body[1]", rect: { x: 0, y: 8, w: 1280, h: 784 } },
      control,
    ],
  });
}
