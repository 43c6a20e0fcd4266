//! Walk the length-penalty shapes and normalize a sampled reward group.
//!
//! Run with: `cargo run --example reward_shaping`

use lenctl::reward::{
    group_advantages, level_prompt, level_threshold, multilevel_penalty, sweet_spot_penalty,
    total_reward, RewardRecord, PenaltyConfig,
};
use lenctl::trace::Level;

fn main() {
    let cfg = PenaltyConfig::default(); // alpha 0.1, beta 0.3, l_max 4096

    println!("Level prompts and thresholds (l_max = {}):", cfg.l_max);
    for level in [Level::Short, Level::Moderate, Level::Long] {
        println!(
            "  {level:<9} threshold {:>5}  prompt: {}",
            level_threshold(level, &cfg).unwrap(),
            level_prompt(level).unwrap()
        );
    }

    println!("\nPenalty by length (correct answers, SHORT vs MODERATE vs LONG; wrong answers linear):");
    println!(
        "{:>6} {:>9} {:>9} {:>9} {:>9}",
        "L", "short", "moderate", "long", "wrong"
    );
    for length in (0..=4096).step_by(512) {
        let row: Vec<f64> = [Level::Short, Level::Moderate, Level::Long]
            .iter()
            .map(|&level| multilevel_penalty(level, length, true, &cfg).unwrap())
            .collect();
        println!(
            "{length:>6} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            row[0],
            row[1],
            row[2],
            sweet_spot_penalty(length, &cfg).unwrap()
        );
    }

    // One sampled group: a concise hit, a verbose hit, a miss, a hit just
    // over the SHORT threshold.
    println!("\nScoring four SHORT-level responses:");
    let samples = [
        ("concise-hit", 1.0, 1.0, 900, true),
        ("verbose-hit", 1.0, 1.0, 3000, true),
        ("miss", 0.0, 1.0, 2048, false),
        ("boundary-hit", 1.0, 1.0, 1024, true),
    ];
    let mut rewards = Vec::new();
    for (id, r_acc, r_format, length, correct) in samples {
        let record =
            RewardRecord::compute(id, r_acc, r_format, Level::Short, length, correct, &cfg)
                .unwrap();
        println!(
            "  {id:<13} r_hat {:.2}  penalty {:.3}  total {:+.3}",
            record.r_hat, record.penalty, record.r_total
        );
        rewards.push(record.r_total);
    }

    let advantages = group_advantages(&rewards, 1e-6).unwrap();
    println!("\nGroup-relative advantages (mean 0, unit std):");
    for ((id, ..), adv) in samples.iter().zip(&advantages) {
        println!("  {id:<13} {adv:+.4}");
    }

    let r_hat = 1.0;
    println!(
        "\nA correct over-threshold SHORT answer keeps r = {} - {} = {}",
        r_hat,
        cfg.beta,
        total_reward(r_hat, cfg.beta)
    );
}
