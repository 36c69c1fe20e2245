/**
 * Request-token bookkeeping: at most one *live* request per overlay kind.
 *
 * Every dispatch takes a fresh token; by the time a response lands, the
 * token may have been superseded by a newer dispatch (slider drags fire
 * many), in which case the response must be discarded.  Tokens never leave
 * a stale overlay on screen: the renderer only commits a response whose
 * token is still current.
 */

export type OverlayKind =
  | "orbit"
  | "heatmap"
  | "heatmap-preview"
  | "manifold"
  | "periodic"
  | "scan";

export class RequestTokens {
  private counters = new Map<OverlayKind, number>();

  /** Start a new request of this kind, invalidating all earlier ones. */
  issue(kind: OverlayKind): number {
    const next = (this.counters.get(kind) ?? 0) + 1;
    this.counters.set(kind, next);
    return next;
  }

  /** Would a response carrying this token still be fresh? */
  isCurrent(kind: OverlayKind, token: number): boolean {
    return this.counters.get(kind) === token;
  }

  /** Invalidate without dispatching (e.g. overlay toggled off). */
  cancel(kind: OverlayKind): void {
    this.issue(kind);
  }
}
