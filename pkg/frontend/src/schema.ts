/**
 * Gateway wire types and command encoding.
 *
 * The encoder is the single place command JSON is produced; its output must
 * stay byte-identical to what the gateway parses (contract-tested against
 * recorded fixtures).
 */

export interface AgentSnapshot {
	id: number;
	x: number;
	y: number;
	z: number;
	mode: string;
	speed: number;
}

export interface Snapshot {
	t: number;
	agents: AgentSnapshot[];
	phase: string;
	curve: { a: number; b: number; o: number };
	ellipse: { u: number; v: number };
	config: {
		A_m: number;
		B_m: number;
		r_s_m: number;
		r_dm_m: number;
		N: number;
		N_min: number;
		N_max: number;
		V_max_mps: number;
	};
}

export interface ConfigEcho {
	region: { A_m: number; B_m: number };
	curve: { a: number; b: number; o: number };
	config: Record<string, number>;
	dt_s: number;
	duration_s: number;
}

export interface Ack {
	ack: Record<string, unknown> | null;
	ok: boolean;
	reason: string;
	tick: number;
}

export type SimpleCommand = "take_off" | "start" | "land" | "add";

export function encodeSimple(cmd: SimpleCommand): string {
	return JSON.stringify({ cmd });
}

export function encodeRemove(id: number): string {
	return JSON.stringify({ cmd: "remove", id });
}

export function encodeReplace(id: number): string {
	return JSON.stringify({ cmd: "replace", id });
}

export function isSnapshot(msg: unknown): msg is Snapshot {
	return typeof msg === "object" && msg !== null && "agents" in msg && "phase" in msg;
}

export function isAck(msg: unknown): msg is Ack {
	return typeof msg === "object" && msg !== null && "ok" in msg;
}

export function describeAck(ack: Ack): string {
	const what = ack.ack ? JSON.stringify(ack.ack) : "(unparsed)";
	return ack.ok
		? `ok ${what} @tick ${ack.tick}`
		: `rejected ${what}: ${ack.reason}`;
}
