use std::ffi::OsString;
use std::path::{Path, PathBuf};

use omma::dataio::{write_estimates, write_labels, SynthModel};
use omma::eval::derive_seed;

use super::{create_dir, load_config, model_params, write_file, COMMON_KEYS, MODEL_KEYS, NOISE_STREAM};
use crate::args::SynthArgs;
use crate::error::{CliError, CliResult};

const SYNTH_KEYS: &[&str] = &["n", "noise", "sparse-k", "out"];

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn output_error(e: omma::Error) -> CliError {
    CliError::Output(e.to_string())
}

pub fn synth(a: SynthArgs) -> CliResult<()> {
    let cfg = load_config(a.common.config.as_deref(), &[COMMON_KEYS, MODEL_KEYS, SYNTH_KEYS])?;
    let params = model_params(&cfg, &a.model)?
        .ok_or_else(|| CliError::config("give a synthetic model with --model or --m"))?;
    let n: usize = cfg.require(a.n, "n")?;
    let seed = cfg.pick_or(a.common.seed, "seed", 0)?;
    let noise = cfg.pick_or(a.noise, "noise", 0.0)?;
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(CliError::config(format!("--noise must be nonnegative, got {noise}")));
    }
    let sparse_k: Option<usize> = cfg.pick(a.sparse_k, "sparse-k")?;
    if sparse_k == Some(0) {
        return Err(CliError::config("--sparse-k must be positive"));
    }
    let prefix: PathBuf = cfg.require(a.out.clone(), "out")?;

    let model = SynthModel::new(params)?;
    let mut stream = model.generate_with_seed(n, seed);
    let mut mean_error = 0.0;
    if noise > 0.0 {
        (stream, mean_error) = stream.perturbed(noise, derive_seed(seed, NOISE_STREAM))?;
    }
    let estimates: Vec<_> = match sparse_k {
        Some(k) => stream.estimates.iter().map(|e| e.top_k(k)).collect(),
        None => stream.estimates.clone(),
    };

    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_labels(&with_extension(&prefix, "labels"), &stream.labels).map_err(output_error)?;
    write_estimates(&with_extension(&prefix, "probs"), &estimates).map_err(output_error)?;
    let truth = stream.truth.as_deref().unwrap_or_default();
    write_estimates(&with_extension(&prefix, "truth"), truth).map_err(output_error)?;
    write_file(&with_extension(&prefix, "model"), &model.params.to_key_values())?;
    println!(
        "wrote {n} instances to {}.{{labels,probs,truth,model}}; mean estimation error {mean_error:.6}",
        prefix.display()
    );
    Ok(())
}
