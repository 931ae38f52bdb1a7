/** Browser bootstrap: wire the canvas, buttons, and gateway socket. */

import { ConsoleController } from "./console.js";
import { GatewayClient } from "./net.js";
import { Renderer } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
	const node = document.getElementById(id);
	if (!node) throw new Error(`missing element #${id}`);
	return node as T;
}

async function boot(): Promise<void> {
	const canvas = el<HTMLCanvasElement>("map");
	const ctx = canvas.getContext("2d");
	if (!ctx) throw new Error("canvas 2d context unavailable");
	const renderer = new Renderer(ctx, canvas.width, canvas.height);

	const client = new GatewayClient();
	const idPicker = el<HTMLInputElement>("agent-id");
	const ackLog = el<HTMLUListElement>("ack-log");
	const sensorToggle = el<HTMLInputElement>("sensors");

	const controller = new ConsoleController(
		{
			takeOff: el<HTMLButtonElement>("btn-takeoff"),
			start: el<HTMLButtonElement>("btn-start"),
			land: el<HTMLButtonElement>("btn-land"),
			add: el<HTMLButtonElement>("btn-add"),
			remove: el<HTMLButtonElement>("btn-remove"),
			replace: el<HTMLButtonElement>("btn-replace"),
		},
		(text) => client.send(text),
	);

	el("btn-takeoff").onclick = () => controller.clickTakeOff();
	el("btn-start").onclick = () => controller.clickStart();
	el("btn-land").onclick = () => controller.clickLand();
	el("btn-add").onclick = () => controller.clickAdd();
	el("btn-remove").onclick = () => controller.clickRemove(Number(idPicker.value));
	el("btn-replace").onclick = () => controller.clickReplace(Number(idPicker.value));

	client.onAck = (ack) => {
		const line = controller.onAck(ack);
		const li = document.createElement("li");
		li.textContent = line;
		ackLog.prepend(li);
		while (ackLog.childElementCount > 12) ackLog.lastElementChild?.remove();
	};

	const proto = location.protocol === "https:" ? "wss" : "ws";
	client.connect(`${proto}://${location.host}/ws`);

	function frame(): void {
		const snap = client.snapshot;
		if (snap) {
			controller.onSnapshot(snap);
			renderer.render(snap, {
				sensorCircles: sensorToggle.checked,
				stale: client.stale,
			});
		}
		requestAnimationFrame(frame);
	}
	requestAnimationFrame(frame);
}

boot();
