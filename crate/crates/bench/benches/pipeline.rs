//! Stage benchmarks on the homogeneous-compression experiment: Voronoi
//! generation, program assembly, the interior-point solve and the per-cell
//! stress reconstruction.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use jamstress_cli::config::{build_problem, seeded_points};
use jamstress_cli::presets::preset_config;
use jamstress_core::forces::extract_forces;
use jamstress_core::geometry::{generate_voronoi, Rect};
use jamstress_core::lp::solve_lp;
use jamstress_core::primal::assemble_lp;
use jamstress_core::reconstruct::reconstruct_all;
use std::hint::black_box;

fn bench_voronoi(c: &mut Criterion) {
    let seeds = seeded_points(60, 4242, Rect::unit());
    let domain = Rect::unit().corners().to_vec();
    c.bench_function("voronoi_60_cells", |b| {
        b.iter(|| generate_voronoi(black_box(&seeds), black_box(&domain)).unwrap())
    });
}

fn bench_assemble(c: &mut Criterion) {
    let problem = build_problem(&preset_config("compress60").unwrap()).unwrap();
    c.bench_function("assemble_compress60", |b| {
        b.iter(|| assemble_lp(black_box(&problem)).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    let problem = build_problem(&preset_config("compress60").unwrap()).unwrap();
    let lp = assemble_lp(&problem).unwrap();
    c.bench_function("solve_compress60", |b| b.iter(|| solve_lp(black_box(&lp), 1e-8).unwrap()));
}

fn bench_reconstruct(c: &mut Criterion) {
    let problem = build_problem(&preset_config("compress60").unwrap()).unwrap();
    let lp = assemble_lp(&problem).unwrap();
    let sol = solve_lp(&lp, 1e-8).unwrap();
    let forces = extract_forces(&sol, &lp, problem.mesh()).unwrap();
    let mut group = c.benchmark_group("reconstruct_compress60");
    for threads in [1usize, 0] {
        let label = if threads == 0 { "all_cores" } else { "single" };
        group.bench_function(label, |b| {
            b.iter_batched(
                || forces.clone(),
                |f| reconstruct_all(black_box(&problem), &f, threads),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, bench_voronoi, bench_assemble, bench_solve, bench_reconstruct);
criterion_main!(benches);
