/**
 * Gateway websocket client with latest-snapshot coalescing and staleness
 * detection.  Snapshot handling keeps only the newest frame; acks are queued
 * individually (commands are never dropped).
 */

import { type Ack, type Snapshot, isAck, isSnapshot } from "./schema.js";

const STALE_AFTER_MS = 1500;

export class GatewayClient {
	private ws: WebSocket | null = null;
	private latest: Snapshot | null = null;
	private lastSeen = 0;
	onAck: (ack: Ack) => void = () => {};
	onStateChange: () => void = () => {};

	connect(url: string): void {
		this.ws = new WebSocket(url);
		this.ws.onmessage = (ev) => {
			const msg = JSON.parse(ev.data as string);
			if (isSnapshot(msg)) {
				this.latest = msg;
				this.lastSeen = Date.now();
			} else if (isAck(msg)) {
				this.onAck(msg);
			}
			this.onStateChange();
		};
		this.ws.onclose = () => this.onStateChange();
		this.ws.onerror = () => this.onStateChange();
	}

	get snapshot(): Snapshot | null {
		return this.latest;
	}

	get stale(): boolean {
		if (this.latest === null) return true;
		if (this.ws && this.ws.readyState !== WebSocket.OPEN) return true;
		return Date.now() - this.lastSeen > STALE_AFTER_MS;
	}

	send(text: string): void {
		if (this.ws && this.ws.readyState === WebSocket.OPEN) {
			this.ws.send(text);
		}
	}
}
