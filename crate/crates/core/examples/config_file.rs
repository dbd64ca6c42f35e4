//! Prints the default configuration as TOML and shows the diagnostic for a
//! bad value.

use certnav::config::Config;

fn main() {
    print!("{}", Config::default().to_toml_string());
    let bad = "seed = 1\n\n[controller]\neps_h = 0.0\n";
    match Config::from_toml_str(bad) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("\n{e}"),
    }
}
