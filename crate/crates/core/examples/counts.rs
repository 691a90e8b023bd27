use polarseq::design::validate_order;
use polarseq::files::parse_total_order_text;
fn main() {
    let text = std::fs::read_to_string("crates/core/data/q256_nested_aesc8.txt").unwrap();
    let q = parse_total_order_text(&text).unwrap();
    let report = validate_order(&q, None);
    println!("violations: {:?}", report.violations);
    let q32 = q.restrict_below(32);
    println!("32-restriction head: {:?}", &q32[..6]);
    println!("32-restriction tail: {:?}", &q32[29..]);
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(text.as_bytes());
    println!("sha256: {}", digest.iter().map(|b| format!("{b:02x}")).collect::<String>());
}
