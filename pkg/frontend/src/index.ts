/**
 * Node client for the tenpath contraction-path optimizer.
 *
 * The client shells out to the `tenpath` CLI (`python -m tenpath`) and talks
 * to it exclusively through its public wire formats: the JSON instance
 * document on stdin and the JSON report / path text on stdout. It exposes
 * the driver (`findPath`) and the evaluator (`evaluatePath`) only.
 *
 * A path is a list of `[i, j]` position pairs into a shrinking term list:
 * each step removes the two referenced terms and appends the result at the
 * end. `findPath` follows the usual custom-path-optimizer calling
 * convention: input subscripts, output subscript, size dictionary in; the
 * pair-list path out.
 */

import { spawnSync } from "node:child_process";

export type ContractionStep = [number, number];

export interface SearchOptions {
  /** Quantity to minimize; defaults to total flops. */
  objective?: "flops" | "size";
  /** Budget: total number of paths to generate (CLI default: 128). */
  paths?: number;
  /** Budget: stop starting new passes after this many milliseconds. */
  timeoutMs?: number;
  /** Base random seed (default 0); identical seeds give identical paths. */
  seed?: number;
  /** Cost function name, or "auto" for the full default set. */
  costFn?: string;
  /** Parallel randomized passes; does not change the result for a fixed seed. */
  threads?: number;
  /** Python interpreter used to run the CLI (default: $TENPATH_PYTHON or python3). */
  pythonBin?: string;
}

export interface PathStats {
  path: ContractionStep[];
  totalFlops: number;
  maxIntermediateSize: number;
  costFn: string;
  treeDepth: number;
}

/** Raised when the CLI rejects the input; carries the core's diagnostic. */
export class TenpathError extends Error {
  constructor(message: string, readonly exitCode: number | null = null) {
    super(message);
    this.name = "TenpathError";
  }
}

function instanceDocument(
  inputs: readonly (readonly string[])[],
  output: readonly string[],
  sizes: Readonly<Record<string, number>>,
): string {
  return JSON.stringify({ inputs, output, index_sizes: sizes });
}

function runCli(args: string[], stdin: string, pythonBin?: string): string {
  const bin = pythonBin ?? process.env.TENPATH_PYTHON ?? "python3";
  const result = spawnSync(bin, ["-m", "tenpath", ...args], {
    input: stdin,
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (result.error) {
    throw new TenpathError(`failed to launch ${bin}: ${result.error.message}`);
  }
  if (result.status !== 0) {
    const diagnostic = (result.stderr ?? "").trim();
    throw new TenpathError(
      diagnostic || `tenpath exited with status ${result.status}`,
      result.status,
    );
  }
  return result.stdout;
}

/**
 * Parse CLI JSON. Saturated flop totals and sizes are serialized by the CLI
 * as bare `Infinity` / `-Infinity`, which strict JSON lacks; rewrite those
 * value tokens to overflowing numeric literals before parsing.
 */
function parseCliJson(text: string): any {
  return JSON.parse(text.replace(/(:\s*)(-?)Infinity/g, "$1$21e999"));
}

function searchFlags(options: SearchOptions): string[] {
  if (options.paths !== undefined && options.timeoutMs !== undefined) {
    throw new TenpathError("set either paths or timeoutMs, not both");
  }
  const flags: string[] = [];
  if (options.objective !== undefined) flags.push("--objective", options.objective);
  if (options.paths !== undefined) flags.push("--paths", String(options.paths));
  if (options.timeoutMs !== undefined) {
    flags.push("--timeout-ms", String(options.timeoutMs));
  }
  if (options.seed !== undefined) flags.push("--seed", String(options.seed));
  if (options.costFn !== undefined) flags.push("--cost-fn", options.costFn);
  if (options.threads !== undefined) flags.push("--threads", String(options.threads));
  return flags;
}

function asStep(step: unknown): ContractionStep {
  if (
    !Array.isArray(step) ||
    step.length !== 2 ||
    typeof step[0] !== "number" ||
    typeof step[1] !== "number"
  ) {
    throw new TenpathError(`malformed path step in CLI output: ${JSON.stringify(step)}`);
  }
  return [step[0], step[1]];
}

/**
 * Find a contraction path for an einsum expression.
 *
 * Returns the identical path the CLI would print for equal inputs, budget,
 * and seed. Validation failures surface as {@link TenpathError} with the
 * core's diagnostic text.
 */
export function findPath(
  inputs: readonly (readonly string[])[],
  output: readonly string[],
  sizes: Readonly<Record<string, number>>,
  options: SearchOptions = {},
): ContractionStep[] {
  const stdout = runCli(
    ["optimize", "--input", "-", "--output", "json", ...searchFlags(options)],
    instanceDocument(inputs, output, sizes),
    options.pythonBin,
  );
  const report = parseCliJson(stdout);
  return (report.best.path as unknown[]).map(asStep);
}

/** Replay and score a path; rejects invalid paths with the core diagnostic. */
export function evaluatePath(
  inputs: readonly (readonly string[])[],
  output: readonly string[],
  sizes: Readonly<Record<string, number>>,
  path: readonly (readonly [number, number])[],
  options: Pick<SearchOptions, "pythonBin"> = {},
): PathStats {
  const stdout = runCli(
    ["evaluate", "--input", "-", "--path", JSON.stringify(path)],
    instanceDocument(inputs, output, sizes),
    options.pythonBin,
  );
  const stats = parseCliJson(stdout);
  return {
    path: (stats.path as unknown[]).map(asStep),
    totalFlops: stats.total_flops,
    maxIntermediateSize: stats.max_intermediate_size,
    costFn: stats.cost_fn,
    treeDepth: stats.tree_depth,
  };
}
