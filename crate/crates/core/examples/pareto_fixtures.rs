//! Extract accuracy/length pareto fronts from the embedded reference
//! tables.
//!
//! Run with: `cargo run --example pareto_fixtures`

use lenctl::analytics::pareto_front;
use lenctl::fixtures;

fn main() {
    for fixture in fixtures::all() {
        let points = fixture.pareto_points();
        let front = pareto_front(&points);
        println!("{} — {}", fixture.name, fixture.description);
        println!("  source: {}", fixture.source);
        println!("  {} points, {} on the front:", points.len(), front.len());
        for point in &front {
            println!(
                "    {:<44} acc {:>6.2}%  mean len {:>8.2}",
                point.label, point.accuracy, point.mean_length
            );
        }
        println!();
    }

    println!(
        "A point is dominated when another has accuracy >= and mean length \
         <=, with one strict; dominated points are dropped, input order kept."
    );
}
