import { describe, expect, it } from "vitest";
import fixtures from "../fixtures/snapshots.json";
import { type Ctx, Renderer } from "../src/render.js";
import type { Snapshot } from "../src/schema.js";

class FakeCtx implements Ctx {
	strokeStyle = "";
	fillStyle = "";
	lineWidth = 1;
	font = "";
	globalAlpha = 1;
	calls: string[] = [];
	texts: string[] = [];
	arcs = 0;

	clearRect() {
		this.calls.push("clearRect");
	}
	beginPath() {
		this.calls.push("beginPath");
	}
	moveTo(x: number, y: number) {
		this.assertFinite(x, y);
	}
	lineTo(x: number, y: number) {
		this.assertFinite(x, y);
	}
	arc(x: number, y: number, r: number) {
		this.assertFinite(x, y, r);
		this.arcs += 1;
	}
	stroke() {
		this.calls.push("stroke");
	}
	fill() {
		this.calls.push("fill");
	}
	fillRect() {
		this.calls.push("fillRect");
	}
	strokeRect(x: number, y: number, w: number, h: number) {
		this.assertFinite(x, y, w, h);
		this.calls.push("strokeRect");
	}
	fillText(text: string) {
		this.texts.push(text);
	}
	private assertFinite(...vals: number[]) {
		for (const v of vals) {
			if (!Number.isFinite(v)) throw new Error(`non-finite coordinate ${v}`);
		}
	}
}

const snapshots = fixtures.snapshots as unknown as (Snapshot & { _label: string })[];

describe("recorded snapshots render without error", () => {
	for (const snap of snapshots) {
		it(`renders ${snap._label} (${snap.phase})`, () => {
			const ctx = new FakeCtx();
			const r = new Renderer(ctx, 760, 560);
			r.render(snap, { sensorCircles: true, stale: false });
			// rectangle, curve, ellipse, and one dot per agent at minimum
			expect(ctx.calls).toContain("strokeRect");
			expect(ctx.arcs).toBeGreaterThanOrEqual(snap.agents.length);
			expect(ctx.texts.join(" ")).toContain(`phase=${snap.phase}`);
		});
	}

	it("marks stale feeds with a banner", () => {
		const ctx = new FakeCtx();
		const r = new Renderer(ctx, 760, 560);
		r.render(snapshots[0], { sensorCircles: false, stale: true });
		expect(ctx.texts.some((t) => t.includes("STALE"))).toBe(true);
	});

	it("sensor circles double the arc count when enabled", () => {
		const airborne = snapshots.find((s) => s.phase === "SURVEIL")!;
		const plain = new FakeCtx();
		new Renderer(plain, 760, 560).render(airborne, { sensorCircles: false, stale: false });
		const with_ = new FakeCtx();
		new Renderer(with_, 760, 560).render(airborne, { sensorCircles: true, stale: false });
		expect(with_.arcs).toBe(plain.arcs + airborne.agents.length);
	});

	it("replacement frame shows altitude-split pair at one spot", () => {
		const ex = snapshots.find((s) => s._label === "reconfig_exchange")!;
		const zs = ex.agents.map((a) => a.z);
		expect(Math.max(...zs) - Math.min(...zs)).toBeGreaterThan(0.5);
		const ctx = new FakeCtx();
		new Renderer(ctx, 760, 560).render(ex, { sensorCircles: false, stale: false });
		expect(ctx.arcs).toBe(ex.agents.length);
	});
});
