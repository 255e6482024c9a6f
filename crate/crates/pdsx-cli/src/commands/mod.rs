pub mod analyze_ck;
pub mod check_rep;
pub mod hcompress;
pub mod qlattice;
pub mod spectrum;

use pdsx_core::ck::CkMatrix;
use pdsx_core::PdsxError;

/// Reads a matrix from a path or an inline JSON array of rows: JSON
/// object, JSON row array, or plain 0/1 text.
pub fn load_matrix(source: &str) -> Result<CkMatrix, PdsxError> {
    let text = if source.trim_start().starts_with('[') {
        source.to_string()
    } else {
        crate::read_input(source)?
    };
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        CkMatrix::from_json(&crate::parse_json(&text)?)
    } else if trimmed.starts_with('[') {
        let rows: Vec<Vec<u8>> = serde_json::from_str(&text)
            .map_err(|e| PdsxError::Parse(format!("invalid row array: {e}")))?;
        CkMatrix::new(rows)
    } else {
        CkMatrix::from_text(&text)
    }
}

pub fn print_report(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}
