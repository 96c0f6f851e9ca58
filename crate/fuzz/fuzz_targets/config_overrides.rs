#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: (&str, &str)| {
    let (doc_text, assignment) = data;
    let parsed = serde_json::from_str::<serde_json::Value>(doc_text);
    let mut doc = match parsed {
        Ok(v) if v.is_object() => v,
        _ => serde_json::json!({}),
    };
    let _ = rrk_cli::apply_override(&mut doc, assignment);
    // whatever the override did, the document must still deserialize or fail
    // with a config error, never panic
    let _ = rrk_cli::RunConfig::from_value(doc);
});
