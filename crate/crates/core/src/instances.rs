//! Seeded benchmark generators: random obstacle maps, room-and-corridor
//! maps, scenarios, and single-step instances.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Cell, GridMap, ScenarioEntry};
use crate::heuristics::compute_table;

/// Blocks every passable cell outside the largest 4-connected component.
pub fn keep_largest_component(map: &GridMap) -> GridMap {
    let n = map.num_cells();
    let mut label = vec![u32::MAX; n];
    let mut best = (0usize, u32::MAX);
    let mut next_label = 0u32;
    let mut queue = VecDeque::new();
    for start in map.passable_cells() {
        let si = map.index(start);
        if label[si] != u32::MAX {
            continue;
        }
        let mut size = 0;
        label[si] = next_label;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            size += 1;
            for v in map.neighbors(u).into_iter().skip(1) {
                let vi = map.index(v);
                if label[vi] == u32::MAX {
                    label[vi] = next_label;
                    queue.push_back(v);
                }
            }
        }
        if size > best.0 {
            best = (size, next_label);
        }
        next_label += 1;
    }
    let passable = label.iter().map(|&l| l == best.1 && l != u32::MAX).collect();
    GridMap::new(map.width(), map.height(), passable)
}

/// `width × height` map with `round(ratio · cells)` obstacles placed
/// uniformly, reduced to its largest component.
pub fn random_map(width: u32, height: u32, obstacle_ratio: f64, seed: u64) -> GridMap {
    let n = (width * height) as usize;
    let blocked = ((obstacle_ratio * n as f64).round() as usize).min(n);
    let mut passable = vec![true; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in rand::seq::index::sample(&mut rng, n, blocked) {
        passable[i] = false;
    }
    keep_largest_component(&GridMap::new(width, height, passable))
}

/// The 32×32 map with 20% obstacles used for the standard random benchmark.
pub fn random_32_32_20(seed: u64) -> GridMap {
    random_map(32, 32, 0.2, seed)
}

/// Rooms of varying size joined by corridors 2 to 5 cells wide, on a
/// 256×257 canvas. Loosely resembles large game maps such as den520d.
pub fn rooms_map(seed: u64) -> GridMap {
    let (w, h) = (256u32, 257u32);
    let mut passable = vec![false; (w * h) as usize];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let carve = |passable: &mut Vec<bool>, r0: u32, c0: u32, r1: u32, c1: u32| {
        for r in r0.min(r1)..=r0.max(r1).min(h - 2) {
            for c in c0.min(c1)..=c0.max(c1).min(w - 2) {
                passable[(r * w + c) as usize] = true;
            }
        }
    };

    let mut centers: Vec<(u32, u32)> = Vec::new();
    for _ in 0..70 {
        let rh = rng.random_range(8..36);
        let rw = rng.random_range(8..36);
        let r0 = rng.random_range(1..h - 1 - rh);
        let c0 = rng.random_range(1..w - 1 - rw);
        carve(&mut passable, r0, c0, r0 + rh - 1, c0 + rw - 1);
        centers.push((r0 + rh / 2, c0 + rw / 2));
    }
    let mut links: Vec<(usize, usize)> = (1..centers.len())
        .map(|i| {
            let near = (0..i)
                .min_by_key(|&j| centers[i].0.abs_diff(centers[j].0) + centers[i].1.abs_diff(centers[j].1))
                .unwrap();
            (i, near)
        })
        .collect();
    for _ in 0..25 {
        let a = rng.random_range(0..centers.len());
        let b = rng.random_range(0..centers.len());
        if a != b {
            links.push((a, b));
        }
    }
    for (a, b) in links {
        let ((ra, ca), (rb, cb)) = (centers[a], centers[b]);
        let width = rng.random_range(2..=5);
        if rng.random_bool(0.5) {
            carve(&mut passable, ra, ca, ra + width - 1, cb);
            carve(&mut passable, ra, cb, rb, cb + width - 1);
        } else {
            carve(&mut passable, ra, ca, rb, ca + width - 1);
            carve(&mut passable, rb, ca, rb + width - 1, cb);
        }
    }
    // scattered pillars inside open areas
    for _ in 0..1500 {
        let r = rng.random_range(1..h - 1);
        let c = rng.random_range(1..w - 1);
        passable[(r * w + c) as usize] = false;
    }
    keep_largest_component(&GridMap::new(w, h, passable))
}

/// `n` tasks with pairwise-distinct starts and pairwise-distinct goals,
/// drawn uniformly from the passable cells. The map is assumed connected.
pub fn random_scenario(map: &GridMap, n: usize, seed: u64) -> Vec<ScenarioEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (starts, goals) = random_tasks(map, n, &mut rng);
    starts
        .into_iter()
        .zip(goals)
        .map(|(start, goal)| ScenarioEntry {
            start,
            goal,
            reference_distance: compute_table(map, goal).dist(start).map_or(f64::INFINITY, f64::from),
        })
        .collect()
}

/// Distinct starts and distinct goals for `n` agents.
pub fn random_tasks<R: Rng>(map: &GridMap, n: usize, rng: &mut R) -> (Vec<Cell>, Vec<Cell>) {
    let mut cells: Vec<Cell> = map.passable_cells().collect();
    assert!(n <= cells.len(), "more agents than passable cells");
    cells.shuffle(rng);
    let starts = cells[..n].to_vec();
    cells.shuffle(rng);
    let goals = cells[..n].to_vec();
    (starts, goals)
}

/// A random single-step instance: a seeded random map of the given size
/// and density with `n` agents placed on its largest component.
#[derive(Debug, Clone)]
pub struct StepInstance {
    pub map: GridMap,
    pub config: Vec<Cell>,
    pub goals: Vec<Cell>,
    pub seed: u64,
}

pub fn random_step_instance(width: u32, height: u32, obstacle_ratio: f64, n: usize, seed: u64) -> StepInstance {
    let map = random_map(width, height, obstacle_ratio, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let (config, goals) = random_tasks(&map, n, &mut rng);
    StepInstance {
        map,
        config,
        goals,
        seed,
    }
}
