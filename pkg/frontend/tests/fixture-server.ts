// Scripted in-memory stand-in for the claimgraph service, speaking the same
// HTTP/JSON contract. Tests drive its state directly (seeding clusters,
// bumping timestamps) and the UI code under test only ever talks HTTP to it.

import http from "node:http";
import { AddressInfo } from "node:net";

interface FixtureClaim {
  id: string;
  text: string;
  article_id: string;
  detection_score: number;
  factchecked: boolean;
}

interface FixtureFactcheck {
  verdict: string;
  note: string;
  checked_at: string;
  source_claim_id: string;
}

export interface FixtureCluster {
  community_id: number;
  claims: FixtureClaim[];
  factchecks: FixtureFactcheck[];
  last_updated: string;
}

const VERDICTS = new Set(["true", "false", "misleading", "unverifiable"]);

export class FixtureService {
  clusters = new Map<number, FixtureCluster>();
  private nextCommunity = 0;
  private submitSeq = 0;
  private server: http.Server | null = null;

  seedCluster(texts: string[], factchecked: string[] = []): FixtureCluster {
    const id = this.nextCommunity++;
    const cluster: FixtureCluster = {
      community_id: id,
      claims: texts.map((text, i) => ({
        id: `a${id}:s${i}`,
        text,
        article_id: `a${id}`,
        detection_score: 0.9,
        factchecked: false,
      })),
      factchecks: [],
      last_updated: new Date().toISOString(),
    };
    this.clusters.set(id, cluster);
    for (const claimId of factchecked) this.applyVerdict(claimId, "false", "seed");
    return cluster;
  }

  /** Scripted server-side change, as if another factchecker acted. */
  touchCluster(communityId: number): void {
    const cluster = this.clusters.get(communityId);
    if (!cluster) throw new Error(`no cluster ${communityId}`);
    cluster.last_updated = new Date(Date.now() + 1).toISOString();
  }

  private findClaim(claimId: string): [FixtureCluster, FixtureClaim] | null {
    for (const cluster of this.clusters.values()) {
      const claim = cluster.claims.find((c) => c.id === claimId);
      if (claim) return [cluster, claim];
    }
    return null;
  }

  private applyVerdict(claimId: string, verdict: string, note: string): number {
    const found = this.findClaim(claimId);
    if (!found) throw new Error(`no claim ${claimId}`);
    const [cluster, claim] = found;
    claim.factchecked = true;
    cluster.factchecks.push({
      verdict,
      note,
      checked_at: new Date().toISOString(),
      source_claim_id: claimId,
    });
    cluster.last_updated = new Date().toISOString();
    return cluster.claims.length;
  }

  /** Claim routing script: texts containing "about:N" join cluster N,
   * everything else becomes a fresh singleton. */
  private submit(text: string) {
    const match = /about:(\d+)/.exec(text);
    const claim: FixtureClaim = {
      id: `submitted:${this.submitSeq++}`,
      text,
      article_id: "",
      detection_score: 1.0,
      factchecked: false,
    };
    let cluster = match ? this.clusters.get(Number(match[1])) : undefined;
    if (cluster) {
      cluster.claims.push(claim);
    } else {
      cluster = {
        community_id: this.nextCommunity++,
        claims: [claim],
        factchecks: [],
        last_updated: "",
      };
      this.clusters.set(cluster.community_id, cluster);
    }
    cluster.last_updated = new Date().toISOString();
    const similar = [...this.clusters.values()]
      .flatMap((cl) =>
        cl.factchecks.map((f) => {
          const source = cl.claims.find((c) => c.id === f.source_claim_id)!;
          return {
            claim_id: source.id,
            text: source.text,
            distance: cl === cluster ? 0.1 : 5.0,
            factcheck: f,
          };
        }),
      )
      .sort((a, b) => a.distance - b.distance)
      .slice(0, 5);
    return {
      report: {
        claim_id: claim.id,
        new_edges: cluster.claims.length - 1,
        community_id: cluster.community_id,
        subgraph_size: cluster.claims.length,
        elapsed_ms: 1.0,
        budget_exceeded: false,
        merged_communities: [],
      },
      community: cluster,
      similar_factchecked: similar,
    };
  }

  private handle(req: http.IncomingMessage, res: http.ServerResponse, body: string): void {
    const url = new URL(req.url ?? "/", "http://fixture");
    const send = (status: number, payload: unknown) => {
      res.writeHead(status, { "content-type": "application/json" });
      res.end(JSON.stringify(payload));
    };
    const parts = url.pathname.split("/").filter(Boolean);
    if (req.method === "GET" && url.pathname === "/healthz") {
      const claims = [...this.clusters.values()].reduce((n, c) => n + c.claims.length, 0);
      return send(200, { status: "ok", claims, clusters: this.clusters.size });
    }
    if (req.method === "GET" && url.pathname === "/clusters") {
      const offset = Number(url.searchParams.get("offset") ?? 0);
      const limit = Number(url.searchParams.get("limit") ?? 50);
      const ids = [...this.clusters.keys()].sort((a, b) => a - b);
      return send(200, {
        clusters: ids.slice(offset, offset + limit).map((id) => this.clusters.get(id)),
        total: ids.length,
        offset,
        limit,
      });
    }
    if (req.method === "GET" && parts[0] === "clusters" && parts.length === 2) {
      const cluster = this.clusters.get(Number(parts[1]));
      return cluster
        ? send(200, cluster)
        : send(404, { detail: `unknown cluster: ${parts[1]}` });
    }
    if (req.method === "POST" && url.pathname === "/claims") {
      const text = (JSON.parse(body || "{}") as { text?: unknown }).text;
      if (typeof text !== "string" || !text.trim()) {
        return send(400, { detail: "text must be a non-empty string" });
      }
      return send(201, this.submit(text));
    }
    if (req.method === "POST" && parts[0] === "claims" && parts[2] === "factcheck") {
      const claimId = decodeURIComponent(parts[1]);
      const payload = JSON.parse(body || "{}") as { verdict?: string; note?: string };
      if (!payload.verdict || !VERDICTS.has(payload.verdict)) {
        return send(400, { detail: `unknown verdict: ${payload.verdict}` });
      }
      if (!this.findClaim(claimId)) {
        return send(404, { detail: `unknown claim: ${claimId}` });
      }
      const covered = this.applyVerdict(claimId, payload.verdict, payload.note ?? "");
      return send(200, { claim_id: claimId, covered });
    }
    send(404, { detail: "not found" });
  }

  async start(): Promise<string> {
    this.server = http.createServer((req, res) => {
      let body = "";
      req.on("data", (chunk) => (body += chunk));
      req.on("end", () => this.handle(req, res, body));
    });
    await new Promise<void>((resolve) => this.server!.listen(0, "127.0.0.1", resolve));
    const { port } = this.server!.address() as AddressInfo;
    return `http://127.0.0.1:${port}`;
  }

  async stop(): Promise<void> {
    if (!this.server) return;
    await new Promise<void>((resolve, reject) =>
      this.server!.close((err) => (err ? reject(err) : resolve())),
    );
    this.server = null;
  }
}
