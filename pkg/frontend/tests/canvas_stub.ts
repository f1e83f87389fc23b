/**
 * Recording stand-in for a 2D canvas context. Captures every draw call
 * with the style that was in effect, so tests can assert what was
 * drawn, where, and in which color, without a real canvas.
 */

import type { Canvas2D } from "../src/render";

export interface ArcOp {
  kind: "arc";
  x: number;
  y: number;
  r: number;
  fillStyle: string;
  strokeStyle: string;
  filled: boolean;
  stroked: boolean;
}

export interface SegmentOp {
  kind: "segment";
  from: [number, number];
  to: [number, number];
  strokeStyle: string;
}

export interface TextOp {
  kind: "text";
  text: string;
  x: number;
  y: number;
}

type PendingPath = {
  arcs: { x: number; y: number; r: number }[];
  segments: { from: [number, number]; to: [number, number] }[];
};

export class RecordingContext implements Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern = "#000";
  strokeStyle: string | CanvasGradient | CanvasPattern = "#000";
  lineWidth = 1;
  font = "";
  textAlign: CanvasTextAlign = "left";
  globalAlpha = 1;

  arcs: ArcOp[] = [];
  segments: SegmentOp[] = [];
  texts: TextOp[] = [];

  private path: PendingPath = { arcs: [], segments: [] };
  private cursor: [number, number] | null = null;

  save(): void {}
  restore(): void {}
  clearRect(): void {}
  fillRect(): void {}
  strokeRect(): void {}
  setLineDash(): void {}

  beginPath(): void {
    this.path = { arcs: [], segments: [] };
    this.cursor = null;
  }

  arc(x: number, y: number, r: number): void {
    this.path.arcs.push({ x, y, r });
  }

  moveTo(x: number, y: number): void {
    this.cursor = [x, y];
  }

  lineTo(x: number, y: number): void {
    if (this.cursor !== null) {
      this.path.segments.push({ from: this.cursor, to: [x, y] });
    }
    this.cursor = [x, y];
  }

  private flush(filled: boolean, stroked: boolean): void {
    for (const a of this.path.arcs) {
      this.arcs.push({
        kind: "arc",
        ...a,
        fillStyle: String(this.fillStyle),
        strokeStyle: String(this.strokeStyle),
        filled,
        stroked,
      });
    }
    if (stroked) {
      for (const s of this.path.segments) {
        this.segments.push({ kind: "segment", ...s, strokeStyle: String(this.strokeStyle) });
      }
    }
    this.path = { arcs: [], segments: [] };
  }

  fill(): void {
    this.flush(true, false);
  }

  stroke(): void {
    this.flush(false, true);
  }

  fillText(text: string, x: number, y: number): void {
    this.texts.push({ kind: "text", text, x, y });
  }

  arcAt(x: number, y: number, tol = 1e-9): ArcOp[] {
    return this.arcs.filter((a) => Math.hypot(a.x - x, a.y - y) <= tol);
  }

  segmentsInColor(color: string): SegmentOp[] {
    return this.segments.filter((s) => s.strokeStyle === color);
  }
}
