"""Kernel source generation for GLSL compute, CUDA, Metal, plus a JSON harness.

Each test thread becomes straight-line switch dispatch inside a while
loop over an integer program counter; exchanges map to the backend's
atomic exchange and plain reads to an atomic add of zero so every
access hits the same coherence point.  Multi-instance layouts replicate
the test across disjoint memory regions and remap workgroup ids so the
relative thread order inside every instance is preserved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .axb import AxbInstruction, LitmusTest

MAX_TOTAL_WORKGROUPS = 65535


class Backend(str, Enum):
    GLSL = "glsl"
    CUDA = "cuda"
    METAL = "metal"
    HARNESS = "harness"


class Variant(str, Enum):
    PLAIN = "plain"
    ROUND_ROBIN = "round-robin"
    CHUNKED = "chunked"


FILE_EXTENSIONS = {
    Backend.GLSL: "comp",
    Backend.CUDA: "cu",
    Backend.METAL: "metal",
    Backend.HARNESS: "json",
}

# Recommended per-backend timeouts for external runners, in seconds.
TIMEOUT_SECONDS: dict[Backend, int | None] = {
    Backend.CUDA: 20,
    Backend.GLSL: 5,
    Backend.METAL: None,
    Backend.HARNESS: None,
}


@dataclass(frozen=True, slots=True)
class EmitConfig:
    backend: Backend
    variant: Variant = Variant.PLAIN
    instances: int | None = None  # None = auto
    workgroup_size: int = 1

    def __post_init__(self) -> None:
        if self.workgroup_size < 1:
            raise ValueError("workgroup size must be positive")
        if self.instances is not None and self.instances < 1:
            raise ValueError("instance count must be positive")


def resolve_instances(
    variant: Variant, num_threads: int, instances: int | None = None
) -> int:
    """Explicit count, or the largest count the workgroup limit allows."""
    if variant is Variant.PLAIN:
        if instances not in (None, 1):
            raise ValueError("the plain layout runs exactly one instance")
        return 1
    if instances is None:
        return MAX_TOTAL_WORKGROUPS // num_threads
    if instances * num_threads > MAX_TOTAL_WORKGROUPS:
        raise ValueError(
            f"{instances} instances of {num_threads} threads exceed "
            f"{MAX_TOTAL_WORKGROUPS} workgroups"
        )
    return instances


def map_workgroup(
    variant: Variant, w: int, num_threads: int, instances: int
) -> tuple[int, int]:
    """Workgroup id -> (instance, test-thread id); bijective, order-keeping."""
    if not 0 <= w < num_threads * instances:
        raise ValueError(f"workgroup {w} out of range for {num_threads}x{instances}")
    if variant is Variant.PLAIN:
        return 0, w
    if variant is Variant.ROUND_ROBIN:
        return w // num_threads, w % num_threads
    return w % instances, w // instances


def expand_layout(test: LitmusTest, variant: Variant, instances: int) -> LitmusTest:
    """The multi-instance test as one big litmus test.

    Thread order follows workgroup ids; instance m owns memory cells
    [m*L, (m+1)*L).
    """
    if variant is Variant.PLAIN and instances == 1:
        return test
    n = test.num_threads
    threads = []
    for w in range(n * instances):
        m, i = map_workgroup(variant, w, n, instances)
        offset = m * test.num_locations
        threads.append(
            tuple(
                AxbInstruction(ins.loc + offset, ins.cmp, ins.jump, ins.exch)
                for ins in test.threads[i]
            )
        )
    return LitmusTest(
        name=f"{test.name}-{variant.value}-x{instances}",
        num_locations=test.num_locations * instances,
        value_domain=test.value_domain,
        threads=tuple(threads),
    )


@dataclass(frozen=True, slots=True)
class KernelArtifact:
    source: str
    entry_point: str
    backend: Backend
    variant: Variant
    num_threads: int
    instances: int
    workgroups: int
    workgroup_size: int
    cells_per_instance: int

    @property
    def buffer_cells(self) -> int:
        return self.cells_per_instance * self.instances

    @property
    def buffer_layout(self) -> dict:
        return {
            "cells": self.buffer_cells,
            "bytes_per_cell": 4,
            "cells_per_instance": self.cells_per_instance,
            "instances": self.instances,
            "zero_initialized": True,
        }


def _mapping_lines(variant: Variant, n: int, m: int, uint: str) -> list[str]:
    if variant is Variant.PLAIN:
        return [f"{uint} m = 0u;", f"{uint} i = w;"]
    if variant is Variant.ROUND_ROBIN:
        return [f"{uint} m = w / {n}u;", f"{uint} i = w % {n}u;"]
    return [f"{uint} m = w % {m}u;", f"{uint} i = w / {m}u;"]


def _thread_body(program, exch_op, load_op, pad: str) -> list[str]:
    """The pc loop of one thread; `pad` is the leading indentation."""
    end = len(program)
    lines = [f"{pad}int pc = 0;", f"{pad}while (pc != {end}) {{", f"{pad}  switch (pc) {{"]
    for idx, ins in enumerate(program):
        op = load_op(ins.loc) if ins.exch is None else exch_op(ins.loc, ins.exch)
        lines.append(f"{pad}    case {idx}:")
        if ins.jump == idx + 1:
            # Both branch outcomes fall through; no conditional needed.
            lines.append(f"{pad}      {op};")
            lines.append(f"{pad}      pc += 1;")
        else:
            lines.append(f"{pad}      if ({op} == {ins.cmp}u) {{")
            lines.append(f"{pad}        pc = {ins.jump};")
            lines.append(f"{pad}      }} else {{")
            lines.append(f"{pad}        pc += 1;")
            lines.append(f"{pad}      }}")
        lines.append(f"{pad}      break;")
    lines.append(f"{pad}  }}")
    lines.append(f"{pad}}}")
    return lines


def _emit_c_like(
    test: LitmusTest,
    config: EmitConfig,
    instances: int,
    header: list[str],
    footer: list[str],
    uint: str,
    exch_op,
    load_op,
) -> str:
    lines = list(header)
    lines += ["  " + s for s in _mapping_lines(config.variant, test.num_threads, instances, uint)]
    lines.append(f"  {uint} base = m * {test.num_locations}u;")
    for tid, program in enumerate(test.threads):
        lines.append(f"  if (i == {tid}u) {{")
        lines += _thread_body(program, exch_op, load_op, "    ")
        lines.append("  }")
    lines += footer
    return "\n".join(lines) + "\n"


def _glsl_source(test: LitmusTest, config: EmitConfig, instances: int) -> str:
    header = [
        "#version 450",
        f"layout(local_size_x = {config.workgroup_size}) in;",
        "layout(set = 0, binding = 0) buffer Mem {",
        "  uint mem[];",
        "};",
        "",
        "void main() {",
        "  uint w = gl_WorkGroupID.x;",
    ]
    return _emit_c_like(
        test,
        config,
        instances,
        header,
        ["}"],
        "uint",
        lambda loc, val: f"atomicExchange(mem[base + {loc}u], {val}u)",
        lambda loc: f"atomicAdd(mem[base + {loc}u], 0u)",
    )


def _cuda_source(test: LitmusTest, config: EmitConfig, instances: int) -> str:
    header = [
        'extern "C" __global__ void progress_test(unsigned int* mem) {',
        "  unsigned int w = blockIdx.x;",
    ]
    return _emit_c_like(
        test,
        config,
        instances,
        header,
        ["}"],
        "unsigned int",
        lambda loc, val: f"atomicExch(&mem[base + {loc}u], {val}u)",
        lambda loc: f"atomicAdd(&mem[base + {loc}u], 0u)",
    )


def _metal_source(test: LitmusTest, config: EmitConfig, instances: int) -> str:
    header = [
        "#include <metal_stdlib>",
        "using namespace metal;",
        "",
        "kernel void progress_test(device atomic_uint* mem [[buffer(0)]],",
        "                          uint w [[threadgroup_position_in_grid]]) {",
    ]
    return _emit_c_like(
        test,
        config,
        instances,
        header,
        ["}"],
        "uint",
        lambda loc, val: (
            f"atomic_exchange_explicit(&mem[base + {loc}u], {val}u, "
            "memory_order_relaxed)"
        ),
        lambda loc: (
            f"atomic_fetch_add_explicit(&mem[base + {loc}u], 0u, "
            "memory_order_relaxed)"
        ),
    )


def _harness_source(test: LitmusTest, config: EmitConfig, instances: int) -> str:
    expanded = expand_layout(test, config.variant, instances)
    groups = []
    n = test.num_threads
    for w, program in enumerate(expanded.threads):
        m, i = map_workgroup(config.variant, w, n, instances)
        groups.append(
            {
                "workgroup": w,
                "instance": m,
                "thread": i,
                "program": [
                    {"loc": ins.loc, "cmp": ins.cmp, "jump": ins.jump, "exch": ins.exch}
                    for ins in program
                ],
            }
        )
    doc = {
        "kind": "axb-harness",
        "name": test.name,
        "variant": config.variant.value,
        "instances": instances,
        "threads_per_instance": n,
        "memory_cells": expanded.num_locations,
        "value_domain": test.value_domain,
        "workgroups": groups,
    }
    return json.dumps(doc, indent=2) + "\n"


def load_harness(source: str) -> LitmusTest:
    """Rebuild the runnable litmus test from a harness artifact."""
    doc = json.loads(source)
    if doc.get("kind") != "axb-harness":
        raise ValueError("not a harness artifact")
    threads = tuple(
        tuple(
            AxbInstruction(p["loc"], p["cmp"], p["jump"], p["exch"])
            for p in group["program"]
        )
        for group in doc["workgroups"]
    )
    return LitmusTest(
        name=doc["name"],
        num_locations=doc["memory_cells"],
        value_domain=doc["value_domain"],
        threads=threads,
    )


_SOURCES = {
    Backend.GLSL: _glsl_source,
    Backend.CUDA: _cuda_source,
    Backend.METAL: _metal_source,
    Backend.HARNESS: _harness_source,
}

_ENTRY_POINTS = {
    Backend.GLSL: "main",
    Backend.CUDA: "progress_test",
    Backend.METAL: "progress_test",
    Backend.HARNESS: "run",
}


def emit_kernel(test: LitmusTest, config: EmitConfig) -> KernelArtifact:
    instances = resolve_instances(config.variant, test.num_threads, config.instances)
    source = _SOURCES[config.backend](test, config, instances)
    return KernelArtifact(
        source=source,
        entry_point=_ENTRY_POINTS[config.backend],
        backend=config.backend,
        variant=config.variant,
        num_threads=test.num_threads,
        instances=instances,
        workgroups=test.num_threads * instances,
        workgroup_size=config.workgroup_size,
        cells_per_instance=test.num_locations,
    )


def emit_amber(test: LitmusTest, config: EmitConfig) -> str:
    """Amber script embedding the GLSL shader, for external execution."""
    if config.backend is not Backend.GLSL:
        raise ValueError("Amber wraps the glsl backend only")
    artifact = emit_kernel(test, config)
    lines = [
        "#!amber",
        "",
        "SHADER compute test_shader GLSL",
        artifact.source.rstrip("\n"),
        "END",
        "",
        f"BUFFER mem DATA_TYPE uint32 SIZE {artifact.buffer_cells} FILL 0",
        "",
        "PIPELINE compute pipeline",
        "  ATTACH test_shader",
        "  BIND BUFFER mem AS storage DESCRIPTOR_SET 0 BINDING 0",
        "END",
        "",
        f"RUN pipeline {artifact.workgroups} 1 1",
    ]
    return "\n".join(lines) + "\n"


def emit_suite(tests, configs, out_dir: str | Path) -> dict:
    """One artifact per (test, config); returns and writes the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    errors = []
    for test in tests:
        for config in configs:
            try:
                artifact = emit_kernel(test, config)
                ext = FILE_EXTENSIONS[config.backend]
                fname = f"{test.name}.{config.variant.value}.{ext}"
                (out / fname).write_text(artifact.source, encoding="utf-8")
                entry = {
                    "test": test.name,
                    "backend": config.backend.value,
                    "variant": config.variant.value,
                    "file": fname,
                    "entry_point": artifact.entry_point,
                    "instances": artifact.instances,
                    "workgroups": artifact.workgroups,
                    "workgroup_size": artifact.workgroup_size,
                    "buffer_cells": artifact.buffer_cells,
                    "cells_per_instance": artifact.cells_per_instance,
                    "timeout_seconds": TIMEOUT_SECONDS[config.backend],
                }
                if config.backend is Backend.GLSL:
                    amber_name = f"{test.name}.{config.variant.value}.amber"
                    (out / amber_name).write_text(
                        emit_amber(test, config), encoding="utf-8"
                    )
                    entry["companion"] = amber_name
                entries.append(entry)
            except Exception as exc:  # noqa: BLE001 - partial failures recorded
                errors.append(
                    {
                        "test": test.name,
                        "backend": config.backend.value,
                        "variant": config.variant.value,
                        "error": f"{type(exc).__name__}: {exc}",
                    }
                )
    manifest = {"entries": entries, "errors": errors}
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return manifest
