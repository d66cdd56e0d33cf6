//! Vocabulary as a JSON array of symbols in id order.

use blockspot_core::Vocab;

use crate::error::{Error, Result};

pub fn vocab_to_json(v: &Vocab) -> String {
    serde_json::to_string(v.symbols()).expect("strings serialize")
}

pub fn vocab_from_json(s: &str) -> Result<Vocab> {
    let symbols: Vec<String> = serde_json::from_str(s).map_err(|e| Error::Usage(format!("vocab: {e}")))?;
    Ok(Vocab::from_symbols(symbols)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let v = Vocab::default();
        assert_eq!(vocab_from_json(&vocab_to_json(&v)).unwrap(), v);
        assert!(vocab_from_json("[\"A\"]").is_err());
    }
}
