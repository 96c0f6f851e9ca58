#![no_main]

use libfuzzer_sys::fuzz_target;
use rrk_cli::csvio::CsvTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(table) = CsvTable::parse(text) else { return };
    // canonicalization is idempotent: anything that parses re-emits to a
    // fixed point
    let once = table.emit();
    let again = CsvTable::parse(&once).expect("canonical output must parse");
    assert_eq!(again.emit(), once);
});
