/**
 * Top-down map rendering onto a 2D canvas context.
 *
 * Everything drawn derives from the latest snapshot plus the static config
 * echo; there is no client-side simulation.  The curve overlay is sampled
 * from the curve constants, the ellipse overlay from the phase offsets the
 * gateway includes in each snapshot.
 */

import type { Snapshot } from "./schema.js";

/** Subset of CanvasRenderingContext2D the renderer touches (fakeable in tests). */
export interface Ctx {
	clearRect(x: number, y: number, w: number, h: number): void;
	beginPath(): void;
	moveTo(x: number, y: number): void;
	lineTo(x: number, y: number): void;
	arc(x: number, y: number, r: number, a0: number, a1: number): void;
	stroke(): void;
	fill(): void;
	fillRect(x: number, y: number, w: number, h: number): void;
	strokeRect(x: number, y: number, w: number, h: number): void;
	fillText(text: string, x: number, y: number): void;
	strokeStyle: string | CanvasGradient | CanvasPattern;
	fillStyle: string | CanvasGradient | CanvasPattern;
	lineWidth: number;
	font: string;
	globalAlpha: number;
}

export interface RenderOptions {
	sensorCircles: boolean;
	stale: boolean;
}

const CURVE_SAMPLES = 1024;
const ELLIPSE_SAMPLES = 256;
const MARGIN_PX = 28;

function altitudeColor(z: number): string {
	// low/staging altitude in blue, formation altitude in orange
	if (z <= 0.01) return "#777777";
	return z < 1.0 ? "#3777d6" : "#e08a1e";
}

export class Renderer {
	private sx = 1;
	private sy = 1;

	constructor(
		private ctx: Ctx,
		private width: number,
		private height: number,
	) {}

	private toPx(x: number, y: number, A: number, B: number): [number, number] {
		const px = this.width / 2 + x * this.sx;
		const py = this.height / 2 - y * this.sy;
		return [px, py];
	}

	render(snap: Snapshot, opts: RenderOptions): void {
		const ctx = this.ctx;
		const { A_m: A, B_m: B, r_s_m: rs, r_dm_m: rdm } = snap.config;
		this.sx = (this.width - 2 * MARGIN_PX) / (2 * A);
		this.sy = (this.height - 2 * MARGIN_PX) / (2 * B);

		ctx.clearRect(0, 0, this.width, this.height);
		ctx.globalAlpha = 1;
		ctx.font = "12px sans-serif";

		// patrol rectangle
		ctx.strokeStyle = "#444444";
		ctx.lineWidth = 1.5;
		const [x0, y0] = this.toPx(-A, B, A, B);
		ctx.strokeRect(x0, y0, 2 * A * this.sx, 2 * B * this.sy);

		this.drawCurve(snap, A, B);
		this.drawEllipse(snap, A, B);

		for (const ag of snap.agents) {
			const [px, py] = this.toPx(ag.x, ag.y, A, B);
			if (opts.sensorCircles && ag.z > 0.01) {
				ctx.strokeStyle = "#9ec7e8";
				ctx.lineWidth = 1;
				ctx.globalAlpha = 0.5;
				ctx.beginPath();
				ctx.arc(px, py, rs * this.sx, 0, 2 * Math.PI);
				ctx.stroke();
				ctx.globalAlpha = 1;
			}
			ctx.fillStyle = altitudeColor(ag.z);
			ctx.beginPath();
			ctx.arc(px, py, Math.max(2, rdm * this.sx), 0, 2 * Math.PI);
			ctx.fill();
			ctx.fillStyle = "#222222";
			ctx.fillText(`${ag.id} ${ag.mode}`, px + 6, py - 6);
		}

		ctx.fillStyle = "#222222";
		ctx.fillText(
			`t=${snap.t.toFixed(2)}s  phase=${snap.phase}  N=${snap.config.N}  curve (${snap.curve.a},${snap.curve.b},${snap.curve.o})`,
			8,
			16,
		);
		if (opts.stale) {
			ctx.fillStyle = "#b00020";
			ctx.fillRect(0, this.height - 24, this.width, 24);
			ctx.fillStyle = "#ffffff";
			ctx.fillText("STALE DATA - connection lost", 8, this.height - 8);
		}
	}

	private drawCurve(snap: Snapshot, A: number, B: number): void {
		const { a, b, o } = snap.curve;
		const phase = (o * Math.PI) / 2;
		const ctx = this.ctx;
		ctx.strokeStyle = "#bbbbbb";
		ctx.lineWidth = 1;
		ctx.beginPath();
		for (let k = 0; k <= CURVE_SAMPLES; k++) {
			const s = (2 * Math.PI * k) / CURVE_SAMPLES;
			const x = A * Math.cos(phase - a * s);
			const y = B * Math.sin(phase + b * s);
			const [px, py] = this.toPx(x, y, A, B);
			if (k === 0) ctx.moveTo(px, py);
			else ctx.lineTo(px, py);
		}
		ctx.stroke();
	}

	private drawEllipse(snap: Snapshot, A: number, B: number): void {
		// instantaneous formation locus: (A cos(psi - u), B sin(psi + v))
		const { u, v } = snap.ellipse;
		const ctx = this.ctx;
		ctx.strokeStyle = "#4a9a4a";
		ctx.lineWidth = 1.2;
		ctx.beginPath();
		for (let k = 0; k <= ELLIPSE_SAMPLES; k++) {
			const psi = (2 * Math.PI * k) / ELLIPSE_SAMPLES;
			const x = A * Math.cos(psi - u);
			const y = B * Math.sin(psi + v);
			const [px, py] = this.toPx(x, y, A, B);
			if (k === 0) ctx.moveTo(px, py);
			else ctx.lineTo(px, py);
		}
		ctx.stroke();
	}
}
