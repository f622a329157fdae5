//! The bundled classifier inputs, rebuilt deterministically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crobs::crx::{DeformationTensor, Form};
use crobs::obstruction::{self, Context, ObstructionError};

pub const N: usize = 5;
pub const NAMES: [&str; 3] = ["zero.json", "w3_obstructed.json", "gauge_trivial.json"];

/// `(file name, JSON contents)` for each bundled example.
pub fn build() -> Result<Vec<(&'static str, String)>, ObstructionError> {
    let ctx = Context::new();
    let zero = DeformationTensor::zero(N);
    let wc = ctx.complex(N, -3, 0)?;
    let w = obstruction::w_space(&wc)?.basis(1)?.remove(0);
    let obstructed = DeformationTensor::from_form(w);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fs: Vec<Form> = [-3, -2].iter().map(|&k| obstruction::random_function(&mut rng, ctx.cache(), N, k, 1)).collect();
    let trivial = obstruction::add_contact(&zero, &fs)?;
    Ok(NAMES.into_iter().zip([zero, obstructed, trivial].iter().map(|t| t.to_json() + "\n")).collect())
}
