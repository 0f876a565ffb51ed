//! Writes the bundled lung-cancer benchmark file: 32 instances, 56
//! four-valued nominal attributes, class split 9/13/10, and a few missing
//! cells in attributes 5 and 39, the shape of the classic lung-cancer
//! table. A fixed generation seed makes the file reproducible.

use std::env;
use std::fs::File;

use fsforge_core::data::{write_arff, AttributeSpec, Cell, Dataset, Instance};
use fsforge_core::seed::rng_for;
use rand::Rng;

const CLASS_COUNTS: [usize; 3] = [9, 13, 10];
const N_ATTRS: usize = 56;
/// attributes whose value distribution tracks the class
const INFORMATIVE: [usize; 10] = [0, 3, 7, 12, 18, 23, 30, 37, 44, 51];
/// chance an informative cell shows its class-typical value
const SIGNAL: f64 = 0.62;
const GENERATION_SEED: u64 = 4;

fn build(seed: u64, signal: f64) -> Dataset {
    let mut rng = rng_for(seed, "lung-cancer", 0);
    let mut instances = Vec::new();
    for (label, &count) in CLASS_COUNTS.iter().enumerate() {
        for _ in 0..count {
            let values: Vec<Cell> = (0..N_ATTRS)
                .map(|a| {
                    let v = if INFORMATIVE.contains(&a) && rng.gen_bool(signal) {
                        (label + a) % 4
                    } else {
                        rng.gen_range(0..4)
                    };
                    Cell::Nominal(v)
                })
                .collect();
            instances.push(Instance::original(values, label));
        }
    }
    // sparse missing cells, like the original table: four in attribute 5,
    // one in attribute 39 (1-based)
    for row in [3, 11, 19, 27] {
        instances[row].values[4] = Cell::Missing;
    }
    instances[17].values[38] = Cell::Missing;

    let domain: Vec<String> = (0..4).map(|v| v.to_string()).collect();
    let schema: Vec<AttributeSpec> = (1..=N_ATTRS)
        .map(|i| AttributeSpec::nominal(format!("attr{i}"), domain.clone()))
        .collect();
    Dataset::new(
        "lung-cancer",
        schema,
        "class",
        vec!["1".into(), "2".into(), "3".into()],
        instances,
    )
    .unwrap()
}

fn main() {
    let mut args = env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "data/lung-cancer.arff".into());
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(GENERATION_SEED);
    let signal = args.next().and_then(|s| s.parse().ok()).unwrap_or(SIGNAL);
    let d = build(seed, signal);
    write_arff(&d, File::create(&path).unwrap()).unwrap();
    println!(
        "wrote {path}: {} instances, {} attributes, class counts {:?}",
        d.n_instances(),
        d.n_attributes(),
        d.class_counts()
    );
}
