//! Contrast ratios of the shipped presets, or of two colours given on
//! the command line.
//!
//! cargo run --example contrast_check -- '#777777' '#FFFFFF'

use clearlens::style::{contrast_ratio, PresetCatalog};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [fg, bg] = args.as_slice() {
        let r = contrast_ratio(fg, bg)?;
        println!("{fg} on {bg}: {r:.2}:1 {}", if r >= 7.0 { "AAA" } else if r >= 4.5 { "AA" } else { "fail" });
        return Ok(());
    }
    for p in PresetCatalog::builtin().iter() {
        println!(
            "{:<16} text {:.2}:1  links {:.2}:1",
            p.name,
            p.text_color.contrast_with(p.background_color),
            p.link_color.contrast_with(p.background_color)
        );
    }
    Ok(())
}
