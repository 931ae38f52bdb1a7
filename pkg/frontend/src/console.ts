/**
 * Operator controls: button enablement mirrors the gateway's own command
 * validation (phase plus the fleet-size bounds), and every click emits the
 * exact gateway JSON through the injected sender.
 */

import {
	type Ack,
	type Snapshot,
	describeAck,
	encodeRemove,
	encodeReplace,
	encodeSimple,
} from "./schema.js";

export interface ButtonLike {
	disabled: boolean;
}

export interface ConsoleButtons {
	takeOff: ButtonLike;
	start: ButtonLike;
	land: ButtonLike;
	add: ButtonLike;
	remove: ButtonLike;
	replace: ButtonLike;
}

export class ConsoleController {
	private phase = "";
	private n = 0;
	private nMin = 0;
	private nMax = 0;
	readonly ackLog: string[] = [];

	constructor(
		private buttons: ConsoleButtons,
		private send: (text: string) => void,
	) {
		this.applyEnablement();
	}

	onSnapshot(snap: Snapshot): void {
		this.phase = snap.phase;
		this.n = snap.config.N;
		this.nMin = snap.config.N_min;
		this.nMax = snap.config.N_max;
		this.applyEnablement();
	}

	onAck(ack: Ack): string {
		const line = describeAck(ack);
		this.ackLog.push(line);
		return line;
	}

	private applyEnablement(): void {
		const b = this.buttons;
		const surveil = this.phase === "SURVEIL";
		b.takeOff.disabled = this.phase !== "GROUND";
		b.start.disabled = this.phase !== "READY";
		b.land.disabled = !(this.phase === "READY" || surveil);
		b.add.disabled = !surveil || this.n + 1 > this.nMax;
		b.remove.disabled = !surveil || this.n - 1 < this.nMin;
		b.replace.disabled = !surveil;
	}

	clickTakeOff(): void {
		this.send(encodeSimple("take_off"));
	}

	clickStart(): void {
		this.send(encodeSimple("start"));
	}

	clickLand(): void {
		this.send(encodeSimple("land"));
	}

	clickAdd(): void {
		this.send(encodeSimple("add"));
	}

	clickRemove(id: number): void {
		this.send(encodeRemove(id));
	}

	clickReplace(id: number): void {
		this.send(encodeReplace(id));
	}
}
