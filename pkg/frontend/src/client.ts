/**
 * Websocket client for the live session server. Wires server frames
 * into the model and paces outgoing input at the served tick period,
 * one sample per tick, with a sequence number that only ever grows.
 */

import { CockpitModel } from "./model";
import {
  ProtocolError,
  abortMessage,
  inputMessage,
  parseServerMessage,
  startTrialMessage,
} from "./protocol";
import { clampToDisc } from "./stylus";

/**
 * Structural subset of a browser WebSocket; the `ws` package satisfies
 * it too, which is what the scripted test client runs on.
 */
export interface CockpitSocket {
  send(data: string): void;
  close(): void;
  onopen: ((...args: any[]) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((...args: any[]) => void) | null;
  onerror: ((...args: any[]) => void) | null;
}

export interface ClientOptions {
  /** Called after every model change so the host can repaint. */
  onUpdate?: () => void;
  now?: () => number;
}

const DEFAULT_TICK_MS = 20;

export class CockpitClient {
  readonly model: CockpitModel;
  private sock: CockpitSocket;
  private opts: ClientOptions;
  private seq = 0;
  private timer: ReturnType<typeof setInterval> | null = null;
  private pendingStart: [string, number] | null = null;

  constructor(sock: CockpitSocket, model: CockpitModel, opts: ClientOptions = {}) {
    this.sock = sock;
    this.model = model;
    this.opts = opts;
    model.status = "connecting";
    sock.onopen = () => {
      this.model.status = "connected";
      if (this.pendingStart !== null) {
        const [condition, seed] = this.pendingStart;
        this.pendingStart = null;
        this.sock.send(startTrialMessage(condition, seed));
      }
      this.changed();
    };
    sock.onmessage = (ev: { data: unknown }) => this.receive(String(ev.data));
    sock.onclose = () => {
      this.stopPacing();
      if (this.model.status !== "error") {
        this.model.status = "closed";
      }
      this.changed();
    };
    sock.onerror = () => {
      if (this.model.status !== "ended" && this.model.status !== "closed") {
        this.model.status = "error";
        this.model.lastError = this.model.lastError ?? "socket error";
      }
      this.changed();
    };
  }

  get lastSeq(): number {
    return this.seq;
  }

  private now(): number {
    return this.opts.now ? this.opts.now() : Date.now();
  }

  private changed(): void {
    this.opts.onUpdate?.();
  }

  private receive(text: string): void {
    let msg;
    try {
      msg = parseServerMessage(text);
    } catch (e) {
      this.model.status = "error";
      this.model.lastError = e instanceof ProtocolError ? e.message : String(e);
      this.stopPacing();
      this.sock.close();
      this.changed();
      return;
    }
    this.model.applyServer(msg, this.now());
    if (msg.type === "trial_start") {
      const dt = msg.config.dynamics?.dt;
      this.startPacing(typeof dt === "number" ? dt * 1000 : DEFAULT_TICK_MS);
    } else if (msg.type === "trial_end" || msg.type === "error") {
      this.stopPacing();
    }
    this.changed();
  }

  /**
   * Ask the server to run one trial; the stream starts on its reply.
   * Queued behind the open handshake when called while connecting.
   */
  startTrial(condition: string, seed: number): void {
    if (this.model.status === "connecting") {
      this.pendingStart = [condition, seed];
      return;
    }
    this.sock.send(startTrialMessage(condition, seed));
  }

  abort(): void {
    this.sock.send(abortMessage());
  }

  close(): void {
    this.stopPacing();
    this.sock.close();
  }

  /**
   * Sample the input devices and send one Input frame. Runs on the
   * pacing timer during a trial; callable directly by tests.
   */
  sendInputNow(): void {
    const m = this.model;
    const stylus = clampToDisc(m.stylus.displacement, m.stylus.max);
    this.seq += 1;
    this.sock.send(inputMessage(this.seq, stylus, m.yawInput(), m.takeInspect()));
  }

  private startPacing(periodMs: number): void {
    this.stopPacing();
    this.sendInputNow();
    this.timer = setInterval(() => this.sendInputNow(), periodMs);
  }

  private stopPacing(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
