//! Regenerates the bundled CSV fixtures under `crates/core/fixtures/`.
//!
//! ```text
//! cargo run -p dqlab --example make_fixtures
//! ```
//!
//! Output is byte-stable: every file is drawn from a fixed ChaCha seed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn write(name: &str, header: &str, rows: &[String]) -> std::io::Result<()> {
    let path = fixtures_dir().join(name);
    let mut f = fs::File::create(&path)?;
    writeln!(f, "{header}")?;
    for r in rows {
        writeln!(f, "{r}")?;
    }
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

/// Three well-separated classes of 500 rows: three Gaussian blobs plus one
/// class-correlated and one pure-noise categorical feature.
fn separable(rng: &mut ChaCha20Rng) -> Vec<String> {
    let centres: [[f64; 3]; 3] = [[5.0, 5.0, 5.0], [11.0, 5.0, 9.0], [8.0, 11.0, 3.0]];
    let colours = ["red", "green", "blue"];
    let shapes = ["circle", "square", "star"];
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::new();
    for (class, centre) in centres.iter().enumerate() {
        for _ in 0..500 {
            let x: Vec<f64> = centre.iter().map(|c| (c + noise.sample(rng)).max(0.0)).collect();
            let colour = if rng.random::<f64>() < 0.7 {
                colours[class]
            } else {
                colours[rng.random_range(0..3)]
            };
            let shape = shapes[rng.random_range(0..3)];
            rows.push(format!("{:.3},{:.3},{:.3},{colour},{shape},c{class}", x[0], x[1], x[2]));
        }
    }
    rows.shuffle(rng);
    rows
}

/// Housing-style regression data: price depends linearly on size, rooms,
/// district and condition, plus noise.
fn regression(rng: &mut ChaCha20Rng) -> Vec<String> {
    let districts = [
        ("north", 20.0),
        ("south", -10.0),
        ("east", 5.0),
        ("west", 0.0),
        ("centre", 40.0),
    ];
    let conditions = [("poor", -25.0), ("fair", 0.0), ("good", 20.0)];
    let noise = Normal::new(0.0, 12.0).unwrap();
    (0..1500)
        .map(|_| {
            let size: f64 = rng.random_range(35.0..160.0);
            let rooms: u32 = (1 + (size / 30.0) as u32).min(6);
            let (district, d_eff) = districts[rng.random_range(0..districts.len())];
            let (condition, c_eff) = conditions[rng.random_range(0..conditions.len())];
            let price = (40.0 + 1.4 * size + 8.0 * rooms as f64 + d_eff + c_eff + noise.sample(rng)).max(1.0);
            format!("{size:.1},{rooms},{district},{condition},{price:.2}")
        })
        .collect()
}

/// 1,000 rows, three classes: 252 distinct rows per class (756 in total)
/// plus 244 exact copies of rows of the same class. 252 is divisible by
/// every denominator of the duplication grid 10/10 .. 10/2.
fn mixed(rng: &mut ChaCha20Rng) -> Vec<String> {
    let colours = ["red", "green", "blue", "black", "white", "grey"];
    let sizes = ["s", "m", "l", "xl"];
    let mut distinct: Vec<Vec<String>> = Vec::new();
    for class in 0..3 {
        let mut rows = Vec::new();
        for i in 0..252 {
            let colour = colours[rng.random_range(0..colours.len())];
            let size = sizes[rng.random_range(0..sizes.len())];
            // the row index keeps every row distinct
            let weight = 50.0 + class as f64 * 10.0 + i as f64 * 0.1;
            let height: f64 = rng.random_range(140.0..200.0);
            rows.push(format!("{colour},{size},{weight:.1},{height:.1},k{class}"));
        }
        distinct.push(rows);
    }
    let mut all: Vec<String> = distinct.iter().flatten().cloned().collect();
    for c in 0..244 {
        let class = &distinct[c % 3];
        all.push(class[rng.random_range(0..class.len())].clone());
    }
    all.shuffle(rng);
    all
}

fn main() -> std::io::Result<()> {
    fs::create_dir_all(fixtures_dir())?;
    let mut rng = ChaCha20Rng::seed_from_u64(20_240_601);
    write("separable.csv", "x1,x2,x3,colour,shape,label", &separable(&mut rng))?;
    write(
        "housing.csv",
        "size,rooms,district,condition,price",
        &regression(&mut rng),
    )?;
    write("mixed.csv", "colour,size,weight,height,kind", &mixed(&mut rng))?;
    Ok(())
}
