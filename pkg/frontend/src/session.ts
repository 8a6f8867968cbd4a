/** One browser tab's exploration state: the uploaded log, the config panel,
 * the latest discovery result, and an append-only run history. At most one
 * discovery request is in flight; re-runs during flight queue up, latest
 * settings winning. */

import {
  ApiClient,
  DisconnectedListing,
  DiscoverResult,
  LogStats,
  NetPayload,
  RemovalResult,
  StageReport,
  UploadResult,
} from "./api.js";
import {
  Algorithm,
  ConfigPanelState,
  DfMode,
  NumericField,
  applyPreset,
  canRun,
  discoverRequestBody,
  initialPanel,
  setAlgorithm,
  setDfMode,
  setField,
} from "./config.js";

export interface HistoryEntry {
  /** The exact request body the run was made with. */
  body: string;
  preset: string;
  algorithm: Algorithm;
  netId: string;
  /** Surviving place count: the funnel's last stage, or the net's place
   * count for the classical baseline (which has no stage report). */
  places: number;
}

export class UiSession {
  log: { id: string; stats: LogStats } | null = null;
  panel: ConfigPanelState = initialPanel();
  lastNet: NetPayload | null = null;
  lastDot = "";
  lastNetId: string | null = null;
  lastReport: StageReport | null = null;
  lastRunBody: string | null = null;
  disconnected: DisconnectedListing | null = null;

  private readonly runs: HistoryEntry[] = [];
  private pendingBody: string | null = null;
  private flight: Promise<void> | null = null;

  constructor(private readonly api: ApiClient) {}

  get history(): readonly HistoryEntry[] {
    return this.runs;
  }

  async upload(
    filename: string,
    data: Blob | Uint8Array,
    csv?: Parameters<ApiClient["uploadLog"]>[2],
  ): Promise<UploadResult> {
    const result = await this.api.uploadLog(filename, data, csv);
    this.log = { id: result.log_id, stats: result.stats };
    this.lastNet = null;
    this.lastDot = "";
    this.lastNetId = null;
    this.lastReport = null;
    this.lastRunBody = null;
    this.disconnected = null;
    return result;
  }

  choosePreset(name: string): void {
    this.panel = applyPreset(this.panel, name);
  }

  editField(field: NumericField, value: number): void {
    this.panel = setField(this.panel, field, value);
  }

  editDfMode(mode: DfMode): void {
    this.panel = setDfMode(this.panel, mode);
  }

  chooseAlgorithm(algorithm: Algorithm): void {
    this.panel = setAlgorithm(this.panel, algorithm);
  }

  currentBody(): string {
    return discoverRequestBody(this.panel.algorithm, this.panel.config);
  }

  /** The last report describes an older config than the panel shows. */
  isStale(): boolean {
    return this.lastRunBody !== null && this.lastRunBody !== this.currentBody();
  }

  /** Run discovery with the panel's settings. Calls while a request is in
   * flight replace any queued settings (latest wins) and share the returned
   * completion promise. */
  run(): Promise<void> {
    if (!this.log) {
      return Promise.reject(new Error("upload a log before running discovery"));
    }
    if (!canRun(this.panel)) {
      return Promise.reject(new Error("fix the highlighted fields before running"));
    }
    this.pendingBody = this.currentBody();
    if (this.flight) {
      return this.flight;
    }
    const snapshot = { preset: this.panel.preset, algorithm: this.panel.algorithm };
    this.flight = (async () => {
      try {
        while (this.pendingBody !== null) {
          const body = this.pendingBody;
          this.pendingBody = null;
          const result = await this.api.discover(this.log!.id, body);
          await this.adopt(result, body, snapshot.preset, snapshot.algorithm);
        }
      } finally {
        this.flight = null;
      }
    })();
    return this.flight;
  }

  private async adopt(
    result: DiscoverResult,
    body: string,
    preset: string,
    algorithm: Algorithm,
  ): Promise<void> {
    this.lastNet = result.net;
    this.lastDot = result.dot;
    this.lastNetId = result.net_id;
    this.lastReport = result.stage_report;
    this.lastRunBody = body;
    this.disconnected = await this.api.disconnected(result.net_id);
    this.runs.push({
      body,
      preset,
      algorithm,
      netId: result.net_id,
      places: result.stage_report
        ? result.stage_report.funnel.places
        : result.net.places.length,
    });
  }

  pnmlUrl(): string | null {
    return this.lastNetId ? this.api.pnmlUrl(this.lastNetId) : null;
  }

  /** Greedily remove the k least frequent disconnected transitions; the
   * diagram state switches to the reduced net the service returns. */
  async removeDisconnected(k: number): Promise<RemovalResult> {
    if (!this.lastNetId) {
      throw new Error("run discovery before removing transitions");
    }
    const result = await this.api.removeDisconnected(this.lastNetId, k);
    this.lastNet = result.net;
    this.lastDot = result.dot;
    this.lastNetId = result.net_id;
    this.disconnected = await this.api.disconnected(result.net_id);
    return result;
  }
}
