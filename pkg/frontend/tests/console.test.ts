import { beforeEach, describe, expect, it } from "vitest";
import fixtures from "../fixtures/snapshots.json";
import { type ButtonLike, ConsoleController } from "../src/console.js";
import type { Snapshot } from "../src/schema.js";

const snapshots = fixtures.snapshots as unknown as (Snapshot & { _label: string })[];

function snapFor(phase: string): Snapshot {
	const s = snapshots.find((x) => x.phase === phase);
	if (!s) throw new Error(`no fixture for phase ${phase}`);
	return s;
}

class Btn implements ButtonLike {
	disabled = false;
}

describe("button enablement mirrors the gateway bounds", () => {
	let buttons: Record<string, Btn>;
	let sent: string[];
	let ctl: ConsoleController;

	beforeEach(() => {
		buttons = {
			takeOff: new Btn(),
			start: new Btn(),
			land: new Btn(),
			add: new Btn(),
			remove: new Btn(),
			replace: new Btn(),
		};
		sent = [];
		ctl = new ConsoleController(buttons as never, (t) => sent.push(t));
	});

	it("reconfig buttons live only in SURVEIL", () => {
		for (const snap of snapshots) {
			ctl.onSnapshot(snap);
			const surveil = snap.phase === "SURVEIL";
			expect(buttons.replace.disabled).toBe(!surveil);
			if (!surveil) {
				expect(buttons.add.disabled).toBe(true);
				expect(buttons.remove.disabled).toBe(true);
			}
		}
	});

	it("ground and ready phases gate takeoff/start", () => {
		ctl.onSnapshot(snapFor("GROUND"));
		expect(buttons.takeOff.disabled).toBe(false);
		expect(buttons.start.disabled).toBe(true);
		ctl.onSnapshot(snapFor("READY"));
		expect(buttons.takeOff.disabled).toBe(true);
		expect(buttons.start.disabled).toBe(false);
	});

	it("add disabled at the fleet ceiling (client-side mirror)", () => {
		const snap = structuredClone(snapFor("SURVEIL"));
		snap.config.N = snap.config.N_max;
		ctl.onSnapshot(snap);
		expect(buttons.add.disabled).toBe(true);
		expect(buttons.replace.disabled).toBe(false);
	});

	it("remove disabled at the fleet floor", () => {
		const snap = structuredClone(snapFor("SURVEIL"));
		snap.config.N = snap.config.N_min;
		ctl.onSnapshot(snap);
		expect(buttons.remove.disabled).toBe(true);
	});

	it("clicks emit the exact recorded wire bytes", () => {
		ctl.onSnapshot(snapFor("SURVEIL"));
		ctl.clickTakeOff();
		ctl.clickStart();
		ctl.clickLand();
		ctl.clickAdd();
		ctl.clickRemove(2);
		ctl.clickReplace(3);
		expect(sent).toEqual(
			(fixtures.commands as { bytes: string }[]).map((c) => c.bytes),
		);
	});

	it("acks land in the log verbatim", () => {
		const line = ctl.onAck({
			ack: { cmd: "remove", id: 9 },
			ok: false,
			reason: "unknown id",
			tick: 42,
		});
		expect(line).toContain("unknown id");
		expect(ctl.ackLog).toHaveLength(1);
	});
});
