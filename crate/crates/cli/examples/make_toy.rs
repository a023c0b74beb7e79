//! Regenerates the toy datasets under `data/toy` (or the directory given as
//! the first argument) from planted models.
//!
//! cargo run -p reprmetric-cli --example make_toy -- data/toy

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reprmetric::synthetic::{planted_preference, planted_triplets, random_items};
use reprmetric::{KernelSpec, PreferenceModel, TripletModel};

const SEED: u64 = 20240611;
const ITEMS: usize = 12;
const COMPARISONS: usize = 150;
const QUERIES: usize = 40;
const MIN_GAP: f64 = 0.05;
/// Held-out queries are kept only when the planted model is this confident.
const QUERY_GAP: f64 = 1.0;

fn csv_row(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/toy".into()));
    std::fs::create_dir_all(&out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let spec = KernelSpec::Rbf { gamma: 0.5 };
    let basis = random_items(&mut rng, spec, ITEMS, 2)?;
    let id = |i: usize| format!("item{i:02}");

    let mut items = String::from("id,x,y\n");
    for (i, v) in basis.items().iter().enumerate() {
        writeln!(items, "{},{}", id(i), csv_row(v))?;
    }
    std::fs::write(out.join("items.csv"), items)?;

    let planted = planted_preference(&mut rng, &basis, COMPARISONS, MIN_GAP)?;
    let mut pairs = String::from("first_id,second_id,y\n");
    for s in &planted.samples {
        writeln!(pairs, "{},{},{}", id(s.first), id(s.second), i64::from(s.y))?;
    }
    std::fs::write(out.join("pairs.csv"), pairs)?;

    let model = PreferenceModel::new(basis.clone(), planted.form, planted.ideal, 0.0)?;
    let mut queries = String::from("x1,y1,x2,y2\n");
    let mut expected = String::from("query,label\n");
    let mut q = 0;
    while q < QUERIES {
        let p: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let delta = model.delta_points(&p[..2], &p[2..])?;
        if delta.abs() < QUERY_GAP {
            continue;
        }
        writeln!(queries, "{}", csv_row(&p))?;
        writeln!(expected, "{q},{}", if delta > 0.0 { 1 } else { -1 })?;
        q += 1;
    }
    std::fs::write(out.join("queries.csv"), queries)?;
    std::fs::write(out.join("queries_expected.csv"), expected)?;

    let planted = planted_triplets(&mut rng, &basis, COMPARISONS, MIN_GAP)?;
    let mut triplets = String::from("anchor_id,second_id,third_id,y\n");
    for s in &planted.samples {
        writeln!(
            triplets,
            "{},{},{},{}",
            id(s.anchor),
            id(s.second),
            id(s.third),
            i64::from(s.y)
        )?;
    }
    std::fs::write(out.join("triplets.csv"), triplets)?;
    let model = TripletModel::new(basis, planted.form)?;
    let mut queries = String::from("x1,y1,x2,y2,x3,y3\n");
    let mut expected = String::from("query,label\n");
    let mut q = 0;
    while q < QUERIES {
        let p: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let delta = model.delta_points(&p[..2], &p[2..4], &p[4..])?;
        if delta.abs() < QUERY_GAP {
            continue;
        }
        writeln!(queries, "{}", csv_row(&p))?;
        writeln!(expected, "{q},{}", if delta > 0.0 { 1 } else { -1 })?;
        q += 1;
    }
    std::fs::write(out.join("triplet_queries.csv"), queries)?;
    std::fs::write(out.join("triplet_queries_expected.csv"), expected)?;

    let common = "\
kernel = { kind = \"rbf\", gamma = 0.5 }
loss = { kind = \"logistic\" }
max_iters = 2000
step_size = 0.1
tol_grad = 1e-6
seed = 0
init = { kind = \"identity_zero\" }
";
    std::fs::write(
        out.join("preference.toml"),
        format!(
            "items_csv = \"items.csv\"\npairs_csv = \"pairs.csv\"\nmodel_out = \"out/preference_model.json\"\nlambda = 0.001\n{common}"
        ),
    )?;
    std::fs::write(
        out.join("triplet.toml"),
        format!(
            "items_csv = \"items.csv\"\ntriplets_csv = \"triplets.csv\"\nmodel_out = \"out/triplet_model.json\"\nmu = 0.001\n{common}"
        ),
    )?;
    println!("wrote toy data to {}", out.display());
    Ok(())
}
