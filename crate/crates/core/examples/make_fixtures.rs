//! Regenerates the bundled CSV fixtures under `fixtures/` at the workspace root.
//!
//! * `null_20x60_sNN_{x,y}.csv`: 20 units, 60 compound-symmetric features,
//!   no signal, for seeds 1..=10.
//! * `borderline_64x200_{x,y}.csv`: 64 units and 200 features with a weak
//!   signal. The heteroskedastic design is tried first, then the
//!   compound-symmetric one; the first signal strength on a fixed ladder whose
//!   5-fold test rejects for between 30% and 70% of the seeds 8891 + s,
//!   s = 1..=100, is kept.
//!
//! Run with `cargo run --release -p xnestcv --example make_fixtures`.

use std::fs;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xnestcv::hypothesis::kfold_cv_test;
use xnestcv::io::write_dataset;
use xnestcv::sim::{gen_design, gen_noise, CovStructure};
use xnestcv::{Dataset, LambdaGrid};

const KFOLD_BASE_SEED: u64 = 8891;

fn main() -> xnestcv::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    fs::create_dir_all(&dir)?;

    for seed in 1..=10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x = gen_design(20, 60, CovStructure::CompoundSymmetric { rho: 0.025 }, &mut rng)?;
        let y = gen_noise(20, 0.5, &mut rng)?;
        write_dataset(
            &dir.join(format!("null_20x60_s{seed:02}_x.csv")),
            &dir.join(format!("null_20x60_s{seed:02}_y.csv")),
            &x,
            &y,
        )?;
    }

    let grid = LambdaGrid::default();
    let ladder = [0.02, 0.04, 0.06, 0.08, 0.1, 0.15, 0.2, 0.3, 0.5];
    for cov in [CovStructure::Heteroskedastic, CovStructure::CompoundSymmetric { rho: 0.025 }] {
        let mut rng = ChaCha8Rng::seed_from_u64(64_200);
        let x = gen_design(64, 200, cov, &mut rng)?;
        let noise = gen_noise(64, 0.5, &mut rng)?;
        for &xi in &ladder {
            let y = x.column_sum() * xi + &noise;
            let ds = Dataset::from_features(y.clone(), &x)?;
            let mut rejections = 0;
            for s in 1..=100u64 {
                if kfold_cv_test(&ds, 5, KFOLD_BASE_SEED + s, &grid, 0.05)?.reject {
                    rejections += 1;
                }
            }
            let fraction = rejections as f64 / 100.0;
            println!("{} xi = {xi}: 5-fold rejection fraction {fraction}", cov.name());
            if (0.3..=0.7).contains(&fraction) {
                write_dataset(&dir.join("borderline_64x200_x.csv"), &dir.join("borderline_64x200_y.csv"), &x, &y)?;
                fs::write(
                    dir.join("borderline_64x200.txt"),
                    format!(
                        "design: {}, N = 64, 200 features, noise variance 0.5, design seed 64200\n\
                         signal xi = {xi}\n\
                         pilot: K = 5, seeds 8891 + s for s = 1..=100, alpha = 0.05, rejection fraction {fraction}\n",
                        cov.name()
                    ),
                )?;
                return Ok(());
            }
        }
    }
    Err(xnestcv::Error::InvalidInput("no signal strength on the ladder landed in the unstable band".into()))
}
