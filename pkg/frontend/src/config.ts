/** Discovery configuration state: presets, field edits, validation, and the
 * canonical request-body serialization shared by every discovery call. */

export type DfMode = "absolute" | "relative";
export type Algorithm = "alphappp" | "alpha";

export interface DiscoveryConfig {
  d: { value: number; mode: DfMode };
  n: number;
  b: number;
  t: number;
  r: number;
  problem_threshold: number;
}

export type NumericField = "dValue" | "n" | "b" | "t" | "r" | "problemThreshold";

function preset(d: number, b: number, t: number, r: number): DiscoveryConfig {
  return {
    d: { value: d, mode: "relative" },
    n: 0,
    b,
    t,
    r,
    problem_threshold: 1.0,
  };
}

const GRID: ReadonlyArray<[number, number, number]> = [
  [0.5, 0.5, 0.5],
  [0.3, 0.7, 0.6],
  [0.2, 0.8, 0.7],
  [0.2, 0.8, 0.8],
  [0.1, 0.9, 0.9],
];

export const PRESETS: Readonly<Record<string, DiscoveryConfig>> = Object.freeze(
  Object.fromEntries(
    [2.0, 4.0].flatMap((d) =>
      GRID.map(([b, t, r]) => [`${d.toFixed(1)}/b${b}t${t}r${r}`, preset(d, b, t, r)]),
    ),
  ),
);

export const PRESET_NAMES: readonly string[] = Object.freeze(Object.keys(PRESETS));

export function presetConfig(name: string): DiscoveryConfig {
  const found = PRESETS[name];
  if (!found) {
    throw new Error(`unknown preset ${name}; available: ${PRESET_NAMES.join(", ")}`);
  }
  return structuredClone(found);
}

/** Canonical config serialization; key order is fixed so identical settings
 * always produce identical bytes on the wire. */
export function configToJson(config: DiscoveryConfig): string {
  return JSON.stringify({
    d: { value: config.d.value, mode: config.d.mode },
    n: config.n,
    b: config.b,
    t: config.t,
    r: config.r,
    problem_threshold: config.problem_threshold,
  });
}

export function discoverRequestBody(algorithm: Algorithm, config: DiscoveryConfig): string {
  if (algorithm === "alpha") {
    return JSON.stringify({ algorithm: "alpha" });
  }
  return `{"algorithm":"alphappp","config":${configToJson(config)}}`;
}

export interface ConfigPanelState {
  config: DiscoveryConfig;
  algorithm: Algorithm;
  /** Name of the matching preset, or "custom" after a diverging manual edit. */
  preset: string;
  /** Inline validation messages per field; cleared by the next valid edit. */
  messages: Partial<Record<NumericField | "dMode", string>>;
}

function matchingPreset(config: DiscoveryConfig): string {
  const serialized = configToJson(config);
  for (const name of PRESET_NAMES) {
    if (configToJson(PRESETS[name]!) === serialized) {
      return name;
    }
  }
  return "custom";
}

export function initialPanel(): ConfigPanelState {
  const name = PRESET_NAMES[0]!;
  return { config: presetConfig(name), algorithm: "alphappp", preset: name, messages: {} };
}

export function applyPreset(state: ConfigPanelState, name: string): ConfigPanelState {
  return { ...state, config: presetConfig(name), preset: name, messages: {} };
}

export function setAlgorithm(state: ConfigPanelState, algorithm: Algorithm): ConfigPanelState {
  return { ...state, algorithm };
}

interface FieldRule {
  min: number;
  max: number | null;
  integer: boolean;
  apply: (config: DiscoveryConfig, value: number) => void;
}

const RULES: Record<NumericField, FieldRule> = {
  dValue: { min: 0, max: null, integer: false, apply: (c, v) => (c.d.value = v) },
  n: { min: 0, max: null, integer: true, apply: (c, v) => (c.n = v) },
  b: { min: 0, max: 1, integer: false, apply: (c, v) => (c.b = v) },
  t: { min: 0, max: 1, integer: false, apply: (c, v) => (c.t = v) },
  r: { min: 0, max: 1, integer: false, apply: (c, v) => (c.r = v) },
  problemThreshold: {
    min: 0,
    max: 1,
    integer: false,
    apply: (c, v) => (c.problem_threshold = v),
  },
};

/** Apply one edited numeric field. Out-of-range values are clamped and leave
 * an inline message; non-numeric input leaves the config untouched. The
 * preset indicator re-derives from the resulting values, so a manual edit
 * that diverges from every preset reads "custom". */
export function setField(
  state: ConfigPanelState,
  field: NumericField,
  raw: number,
): ConfigPanelState {
  const rule = RULES[field];
  const messages = { ...state.messages };
  delete messages[field];
  if (Number.isNaN(raw)) {
    messages[field] = "not a number";
    return { ...state, messages };
  }
  let value = raw;
  if (rule.integer) {
    value = Math.round(value);
  }
  if (value < rule.min) {
    value = rule.min;
    messages[field] = `clamped to ${rule.min}`;
  } else if (rule.max !== null && value > rule.max) {
    value = rule.max;
    messages[field] = `clamped to ${rule.max}`;
  }
  const config = structuredClone(state.config);
  rule.apply(config, value);
  return { ...state, config, preset: matchingPreset(config), messages };
}

export function setDfMode(state: ConfigPanelState, mode: DfMode): ConfigPanelState {
  const config = structuredClone(state.config);
  config.d.mode = mode;
  const messages = { ...state.messages };
  delete messages.dMode;
  return { ...state, config, preset: matchingPreset(config), messages };
}

/** Discovery may run unless a field currently holds unusable input. */
export function canRun(state: ConfigPanelState): boolean {
  return !Object.values(state.messages).some((m) => m === "not a number");
}
