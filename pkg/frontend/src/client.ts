/**
 * WebSocket frame client.
 *
 * The service answers every request with a JSON text envelope; when the
 * envelope says ok it is followed by exactly one binary message holding
 * width*height grayscale bytes. Requests are answered in order, so a FIFO
 * queue pairs replies with their callers. The socket is typed structurally
 * so both the browser WebSocket and the node "ws" client fit, and tests
 * can drive the client with a hand-rolled mock.
 */

import type { FrameEnvelope, FrameRequest } from "./protocol.js";

export interface FrameSocket {
  binaryType: string;
  send(data: string): void;
  close(): void;
  onmessage: ((event: any) => void) | null;
  onclose: ((event: any) => void) | null;
}

export interface RenderedFrame {
  envelope: FrameEnvelope;
  pixels: Uint8Array;
}

interface Pending {
  resolve: (frame: RenderedFrame) => void;
  reject: (err: Error) => void;
}

function toBytes(data: unknown): Uint8Array {
  if (data instanceof ArrayBuffer) return new Uint8Array(data);
  if (ArrayBuffer.isView(data)) {
    return new Uint8Array(data.buffer, data.byteOffset, data.byteLength);
  }
  throw new Error(`unexpected binary payload: ${typeof data}`);
}

export class FrameClient {
  private readonly pending: Pending[] = [];
  private awaitingBinary: FrameEnvelope | null = null;
  private closed = false;

  constructor(private readonly socket: FrameSocket) {
    socket.binaryType = "arraybuffer";
    socket.onmessage = (event: { data: unknown }) => this.handleMessage(event.data);
    socket.onclose = () => this.failAll("socket closed");
  }

  /** True while a request is waiting on the service. */
  get busy(): boolean {
    return this.pending.length > 0;
  }

  request(req: FrameRequest): Promise<RenderedFrame> {
    if (this.closed) return Promise.reject(new Error("socket closed"));
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.socket.send(JSON.stringify(req));
    });
  }

  close(): void {
    this.socket.close();
    this.failAll("socket closed");
  }

  private handleMessage(data: unknown): void {
    if (typeof data === "string") {
      const envelope = JSON.parse(data) as FrameEnvelope;
      if (!envelope.ok) {
        // error envelopes carry no binary follow-up
        this.pending.shift()?.reject(new Error(envelope.error ?? "render failed"));
        return;
      }
      this.awaitingBinary = envelope;
      return;
    }
    const envelope = this.awaitingBinary;
    this.awaitingBinary = null;
    const head = this.pending.shift();
    if (!head) return;
    if (!envelope) {
      head.reject(new Error("binary frame arrived without an envelope"));
      return;
    }
    head.resolve({ envelope, pixels: toBytes(data) });
  }

  private failAll(reason: string): void {
    this.closed = true;
    while (this.pending.length > 0) {
      this.pending.shift()?.reject(new Error(reason));
    }
  }
}
