use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use pag_core::rational::int;
use pag_core::*;

const LINE: &str = include_str!("../../core/tests/data/line3.scn");
const CASE1: &str = include_str!("../../core/tests/data/case1.scn");

fn enumerate(c: &mut Criterion) {
    let s = parse_scenario(LINE).unwrap();
    let pref = s.preference().unwrap();
    c.bench_function("enumerate_line_game", |b| {
        b.iter(|| enumerate_classes(&s.graph, &pref, &EnumerationOptions::default()).unwrap())
    });
}

fn response(c: &mut Criterion) {
    let s = parse_scenario(CASE1).unwrap();
    let pref = s.preference().unwrap();
    let u = sample_initial(&s.graph, 1, 7, 1_000_000).pop().unwrap();
    c.bench_function("best_response_six_countries", |b| {
        b.iter(|| best_response(&s.graph, &pref, black_box(&u), 1))
    });
}

fn feasibility(c: &mut Criterion) {
    let s = parse_scenario(LINE).unwrap();
    // interior of the first listed class of the line game, plus a strict face
    let mut p = strategy_space(&s.graph);
    p.push(LinearConstraint::ge(vec![int(1), int(0), int(0), int(1)], int(9)));
    p.push(LinearConstraint::gt(vec![int(0), int(0), int(1), int(0)], int(5)));
    c.bench_function("polytope_feasibility", |b| b.iter(|| black_box(&p).is_feasible()));
}

fn simulate(c: &mut Criterion) {
    let s = parse_scenario(CASE1).unwrap();
    let pref = s.preference().unwrap();
    let config = SimConfig {
        q: 1,
        seed: 7,
        ..Default::default()
    };
    let starts = sample_initial(&s.graph, 64, 7, config.lattice);
    let mut next = starts.iter().cycle();
    c.bench_function("run_process_case_study", |b| {
        b.iter_batched(
            || next.next().unwrap().clone(),
            |start| run_process(&s.graph, &pref, 0, start, &config),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, enumerate, response, feasibility, simulate);
criterion_main!(benches);
