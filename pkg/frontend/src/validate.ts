/** Client-side input checks that run before any network call, and the
 * audio byte plumbing (WAV header parsing for uploads, WAV wrapping for
 * playback of pcm16 responses).
 */

import { Scalar } from "./types.js";

export interface ClientIssue {
  field: string;
  message: string;
}

/** Which envelope kind a service class accepts. */
export function requestKindFor(serviceClass: string): "text" | "audio" {
  return serviceClass === "ASR" ? "audio" : "text";
}

export interface TryOutInput {
  kind: "text" | "audio";
  text?: string;
  audioBytes?: Uint8Array;
  params: Record<string, Scalar>;
}

export function validateTryOut(serviceClass: string, input: TryOutInput): ClientIssue[] {
  const issues: ClientIssue[] = [];
  const wanted = requestKindFor(serviceClass);
  if (input.kind !== wanted) {
    issues.push({
      field: "input",
      message: `${serviceClass} services take ${wanted} input, not ${input.kind}`,
    });
    return issues;
  }
  if (input.kind === "text") {
    if (!input.text || input.text.length === 0) {
      issues.push({ field: "text", message: "enter some text to send" });
    }
    if (serviceClass === "MT") {
      const target = input.params["target_lang"];
      if (typeof target !== "string" || target === "") {
        issues.push({ field: "params.target_lang", message: "MT needs a target_lang parameter" });
      }
    }
  } else {
    if (!input.audioBytes || input.audioBytes.length === 0) {
      issues.push({ field: "audio", message: "choose an audio file to send" });
    } else {
      issues.push(...checkAudioUpload(input.audioBytes));
    }
  }
  return issues;
}

export interface WavInfo {
  audioFormat: number;
  bitsPerSample: number;
  sampleRate: number;
  channels: number;
  dataOffset: number;
  dataLength: number;
}

function ascii(bytes: Uint8Array, offset: number, length: number): string {
  return String.fromCharCode(...bytes.subarray(offset, offset + length));
}

/** Parse a RIFF/WAVE header; null when the bytes are not a WAV file at all. */
export function parseWavHeader(bytes: Uint8Array): WavInfo | null {
  if (bytes.length < 12 || ascii(bytes, 0, 4) !== "RIFF" || ascii(bytes, 8, 4) !== "WAVE") {
    return null;
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  let offset = 12;
  let fmt: { audioFormat: number; bitsPerSample: number; sampleRate: number; channels: number } | null = null;
  while (offset + 8 <= bytes.length) {
    const chunkId = ascii(bytes, offset, 4);
    const chunkSize = view.getUint32(offset + 4, true);
    const body = offset + 8;
    if (chunkId === "fmt " && body + 16 <= bytes.length) {
      fmt = {
        audioFormat: view.getUint16(body, true),
        channels: view.getUint16(body + 2, true),
        sampleRate: view.getUint32(body + 4, true),
        bitsPerSample: view.getUint16(body + 14, true),
      };
    } else if (chunkId === "data" && fmt !== null) {
      return {
        ...fmt,
        dataOffset: body,
        dataLength: Math.min(chunkSize, bytes.length - body),
      };
    }
    offset = body + chunkSize + (chunkSize % 2);
  }
  return null;
}

/** The one descriptor the grid accepts. */
export const REQUIRED_DESCRIPTOR = { encoding: "pcm16", sample_rate: 16000, channels: 1 };

export function checkAudioUpload(bytes: Uint8Array): ClientIssue[] {
  const wav = parseWavHeader(bytes);
  if (wav === null) {
    // raw pcm16 passthrough; only the sample alignment is checkable
    if (bytes.length % 2 !== 0) {
      return [{ field: "audio", message: "raw pcm16 needs a whole number of 16-bit samples" }];
    }
    return [];
  }
  const issues: ClientIssue[] = [];
  if (wav.audioFormat !== 1 || wav.bitsPerSample !== 16) {
    issues.push({
      field: "audio",
      message: `WAV must be 16-bit PCM, got format ${wav.audioFormat} at ${wav.bitsPerSample} bits`,
    });
  }
  if (wav.sampleRate !== REQUIRED_DESCRIPTOR.sample_rate) {
    issues.push({
      field: "audio",
      message: `WAV must be sampled at 16000 Hz, got ${wav.sampleRate}`,
    });
  }
  if (wav.channels !== REQUIRED_DESCRIPTOR.channels) {
    issues.push({ field: "audio", message: `WAV must be mono, got ${wav.channels} channels` });
  }
  return issues;
}

/** The pcm16 payload to send: the data chunk of a valid WAV, or the bytes
 *  as they are. Call checkAudioUpload first. */
export function pcm16Payload(bytes: Uint8Array): Uint8Array {
  const wav = parseWavHeader(bytes);
  if (wav === null) {
    return bytes;
  }
  return bytes.subarray(wav.dataOffset, wav.dataOffset + wav.dataLength);
}

export function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(binary);
}

export function base64ToBytes(payload: string): Uint8Array {
  const binary = atob(payload);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) {
    bytes[i] = binary.charCodeAt(i);
  }
  return bytes;
}

/** Wrap a pcm16 payload in a RIFF header so an <audio> element can play it. */
export function wavFromPcm16(data: Uint8Array, sampleRate = 16000, channels = 1): Uint8Array {
  const header = new ArrayBuffer(44);
  const view = new DataView(header);
  const byteRate = sampleRate * channels * 2;
  const writeAscii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i++) {
      view.setUint8(offset + i, text.charCodeAt(i));
    }
  };
  writeAscii(0, "RIFF");
  view.setUint32(4, 36 + data.length, true);
  writeAscii(8, "WAVE");
  writeAscii(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 1, true);
  view.setUint16(22, channels, true);
  view.setUint32(24, sampleRate, true);
  view.setUint32(28, byteRate, true);
  view.setUint16(32, channels * 2, true);
  view.setUint16(34, 16, true);
  writeAscii(36, "data");
  view.setUint32(40, data.length, true);
  const out = new Uint8Array(44 + data.length);
  out.set(new Uint8Array(header), 0);
  out.set(data, 44);
  return out;
}
