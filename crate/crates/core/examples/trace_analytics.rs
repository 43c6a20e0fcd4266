//! Generate a batch with injected repetition loops and run the analytics
//! over it: repeat rate, length stats, step counts, thinking:solution
//! ratios.
//!
//! Run with: `cargo run --example trace_analytics`

use lenctl::analytics::{
    count_steps, length_stats, repeat_rate, think_solution_ratio, DEFAULT_MIN_BLOCK_TOKENS,
    DEFAULT_REPEAT_K,
};
use lenctl::policy::PolicyConfig;
use lenctl::sim::{generate, LoopInject, SimConfig};
use lenctl::trace::{TraceSet, SCHEMA_VERSION};

fn main() {
    let policy = PolicyConfig::auto(2048);
    let mut traces = Vec::new();

    // 40 runs; every 4th one falls into a verbatim 25-token loop.
    for i in 0..40u64 {
        let loop_inject = (i % 4 == 0).then(|| LoopInject {
            start: 10,
            block: (3..28).collect(),
            cycles: Some(12),
        });
        let cfg = SimConfig {
            vocab_size: 64,
            eos_logit: -3.5,
            end_think_logit: Some(-4.0),
            loop_inject,
            seed: 1000 + i,
            max_steps: 2048,
            ..SimConfig::default()
        };
        traces.push(generate(&cfg, &policy, None).unwrap().trace);
    }
    let set = TraceSet {
        schema_version: SCHEMA_VERSION.into(),
        max_context: 2048,
        tokenizer: "whitespace".into(),
        traces,
    };

    // Simulated problems are never solved, so every trace counts as wrong
    // and the repeat rate is taken over the full set.
    let rate = repeat_rate(&set, DEFAULT_MIN_BLOCK_TOKENS, DEFAULT_REPEAT_K).unwrap();
    println!(
        "repeat rate: {rate:.2} (injected 10 loops into 40 wrong traces; \
         detector: block >= {DEFAULT_MIN_BLOCK_TOKENS} tokens, k >= {DEFAULT_REPEAT_K})"
    );

    let stats = length_stats(&set).unwrap();
    println!(
        "\nlengths: n {} mean {:.1} (correct bucket {}, wrong bucket {})",
        stats.n_all,
        stats.mean_all,
        stats
            .mean_correct
            .map_or("absent".to_string(), |m| format!("{m:.1}")),
        stats
            .mean_wrong
            .map_or("absent".to_string(), |m| format!("{m:.1}")),
    );
    println!("histogram (bin width {}):", stats.bin_width);
    for bin in &stats.histogram {
        println!("  {:>5}..{:<5} {}", bin.start, bin.start + stats.bin_width, "#".repeat(bin.count as usize));
    }

    let ratios: Vec<_> = set.traces.iter().map(think_solution_ratio).collect();
    let with_solution: Vec<f64> = ratios
        .iter()
        .filter(|r| !r.zero_solution)
        .map(|r| r.ratio)
        .collect();
    println!(
        "\nthinking:solution ratio: mean {:.2} over {} traces that reached a \
         solution ({} never did)",
        with_solution.iter().sum::<f64>() / with_solution.len().max(1) as f64,
        with_solution.len(),
        ratios.len() - with_solution.len()
    );

    let sample = "Okay, let me think. The sum is 42. Wait, check again. Therefore, 42.";
    println!("\nstep keywords in {sample:?}: {}", count_steps(sample));
}
