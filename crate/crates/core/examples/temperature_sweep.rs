//! Sweep the EOS temperature and compare mean generated lengths against the
//! closed-form geometric oracle.
//!
//! The simulator's logits are static, so with EOS probability `p` the mean
//! length is exactly `1/p`. Scaling the (positive) EOS logit by `1/T` with
//! `T < 1` raises `p` and shortens runs; the sweep makes the effect and the
//! oracle agreement visible.
//!
//! Run with: `cargo run --example temperature_sweep`

use lenctl::logits::EosTemperature;
use lenctl::policy::PolicyConfig;
use lenctl::sim::{expected_length, run_many, SimConfig};

fn main() {
    let cfg = SimConfig {
        vocab_size: 12, // eos + delimiter + wait + 9 body tokens
        eos_logit: 1.0,
        max_steps: 10_000,
        seed: 7,
        ..SimConfig::default()
    };
    let policy = PolicyConfig::auto(10_000);
    let runs = 2000;

    println!("EOS logit +1 against 9 body tokens at 0; {runs} runs per temperature\n");
    println!("{:>5} {:>10} {:>12} {:>12} {:>8}", "T", "p(eos)", "mean", "oracle 1/p", "err %");

    for temp in [1.0, 0.7, 0.5, 0.3] {
        // closed form for the scaled softmax: p = e^(1/T) / (e^(1/T) + 9)
        let boosted = (cfg.eos_logit / temp).exp();
        let p_eos = boosted / (boosted + 9.0);
        let oracle = expected_length(p_eos).unwrap();

        let set = run_many(
            &cfg,
            &policy,
            Some(EosTemperature::new(temp).unwrap()),
            runs,
        )
        .unwrap();
        let mean =
            set.traces.iter().map(|t| t.total_len as f64).sum::<f64>() / set.len() as f64;

        println!(
            "{temp:>5.1} {p_eos:>10.5} {mean:>12.4} {oracle:>12.4} {:>7.2}%",
            100.0 * (mean - oracle).abs() / oracle
        );
    }

    println!("\nLower T -> higher stopping hazard -> shorter runs.");
}
