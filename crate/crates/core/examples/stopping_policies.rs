//! Run the four stopping policies over the same simulator and show each
//! one's hard guarantee on the thinking segment.
//!
//! Run with: `cargo run --example stopping_policies`

use lenctl::policy::{render_prompt, PolicyConfig};
use lenctl::sim::{run_many, SimConfig};
use lenctl::trace::Level;

fn main() {
    // The generator proposes the end-of-thinking delimiter with a small
    // hazard, so unconstrained thinking varies run to run.
    let cfg = SimConfig {
        vocab_size: 16,
        eos_logit: -6.0,
        end_think_logit: Some(-3.0),
        max_steps: 4096,
        seed: 11,
        ..SimConfig::default()
    };
    let runs = 500;

    let policies = [
        ("auto", PolicyConfig::auto(4096)),
        ("prompt control (hint 200)", PolicyConfig::prompt_control(200, 4096)),
        ("budget forcing (budget 200)", PolicyConfig::budget_forcing(200, 4096)),
        ("exact control (target 200)", PolicyConfig::exact_control(200, 4096)),
    ];

    println!("{runs} seeded runs per policy\n");
    println!(
        "{:<28} {:>9} {:>9} {:>10} {:>10}",
        "policy", "min think", "max think", "mean total", "at 200 %"
    );

    for (name, policy) in &policies {
        let set = run_many(&cfg, policy, None, runs).unwrap();
        let thinking: Vec<u64> = set.traces.iter().map(|t| t.thinking_len).collect();
        let mean_total =
            set.traces.iter().map(|t| t.total_len as f64).sum::<f64>() / set.len() as f64;
        let at_cap = thinking.iter().filter(|t| **t == 200).count();
        println!(
            "{name:<28} {:>9} {:>9} {mean_total:>10.1} {:>9.1}%",
            thinking.iter().min().unwrap(),
            thinking.iter().max().unwrap(),
            100.0 * at_cap as f64 / runs as f64,
        );
    }

    println!("\nPrompt rendering per policy/level:");
    let question = "What is 7 * 6?";
    let pc = PolicyConfig::prompt_control(200, 4096);
    println!("  pc:    {}", render_prompt(question, &pc, Level::None));
    let auto = PolicyConfig::auto(4096);
    println!("  short: {}", render_prompt(question, &auto, Level::Short));
    println!("  auto:  {}", render_prompt(question, &auto, Level::None));

    println!(
        "\nBudget forcing keeps thinking <= budget; exact control pins it to \
         the target; auto and prompt control never interfere."
    );
}
