/** Typed client for the discovery service. The UI computes nothing itself:
 * every rendered number originates in one of these response payloads. */

export interface LogStats {
  events: number;
  activities: number;
  traces: number;
  variants: number;
}

export interface UploadResult {
  log_id: string;
  stats: LogStats;
}

export interface DfgArc {
  source: string;
  target: string;
  weight: number;
}

export interface DfgResult {
  nodes: string[];
  arcs: DfgArc[];
  dot: string;
}

export interface NetPlace {
  id: string;
  label: string;
  initial: number;
  final: number;
}

export interface NetTransition {
  id: string;
  label: string | null;
  silent: boolean;
}

export interface NetArc {
  source: string;
  target: string;
}

export interface NetPayload {
  places: NetPlace[];
  transitions: NetTransition[];
  arcs: NetArc[];
}

export interface StageFunnel {
  cnd0: number;
  cnd1: number;
  cnd2: number;
  sel: number;
  places: number;
}

export interface StageReport {
  repair: {
    removed_activities: string[];
    loops: Array<{ from: string; to: string }>;
    skip_rules: Array<{ anchor: string; group: string[] }>;
    insertions: { loop: number; skip: number };
  };
  adfg: { arcs_kept: number; arcs_removed: number };
  candidates: Record<string, number | boolean>;
  places: { before_pruning: number; after_pruning: number };
  funnel: StageFunnel;
  timings: Record<string, number>;
  cache: { repair_hit: boolean; candidates_hit: boolean };
}

export interface DiscoverResult {
  net_id: string;
  algorithm: string;
  net: NetPayload;
  stage_report: StageReport | null;
  dot: string;
}

export interface DisconnectedListing {
  count: number;
  transitions: Array<{ id: string; label: string | null; frequency: number }>;
}

export interface RemovalResult {
  net_id: string;
  net: NetPayload;
  dot: string;
  removed: Array<string | null>;
}

export interface CsvColumns {
  case_column?: string;
  activity_column?: string;
  timestamp_column?: string;
  timestamp_format?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async uploadLog(
    filename: string,
    data: Blob | Uint8Array,
    csv?: CsvColumns,
  ): Promise<UploadResult> {
    const form = new FormData();
    const blob = data instanceof Blob ? data : new Blob([data as BlobPart]);
    form.append("file", blob, filename);
    for (const [key, value] of Object.entries(csv ?? {})) {
      if (value !== undefined) form.append(key, value);
    }
    const response = await this.fetchImpl(`${this.baseUrl}/logs`, {
      method: "POST",
      body: form,
    });
    return parseOrThrow<UploadResult>(response);
  }

  async getDfg(logId: string, minWeight = 0): Promise<DfgResult> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/logs/${logId}/dfg?min_weight=${minWeight}`,
    );
    return parseOrThrow<DfgResult>(response);
  }

  /** The body is the pre-serialized request string, so what the caller tested
   * for byte-identity is exactly what goes on the wire. */
  async discover(logId: string, body: string): Promise<DiscoverResult> {
    const response = await this.fetchImpl(`${this.baseUrl}/logs/${logId}/discover`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body,
    });
    return parseOrThrow<DiscoverResult>(response);
  }

  pnmlUrl(netId: string): string {
    return `${this.baseUrl}/nets/${netId}.pnml`;
  }

  async disconnected(netId: string): Promise<DisconnectedListing> {
    const response = await this.fetchImpl(`${this.baseUrl}/nets/${netId}/disconnected`);
    return parseOrThrow<DisconnectedListing>(response);
  }

  async removeDisconnected(netId: string, k: number): Promise<RemovalResult> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/nets/${netId}/remove-disconnected`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ k }),
      },
    );
    return parseOrThrow<RemovalResult>(response);
  }
}
