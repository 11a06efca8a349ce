#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(f) = sparsemc::formula::parse_dimacs(text) {
            // A parse that succeeds must render back to something the
            // parser accepts with identical structure.
            let rendered = sparsemc::formula::render_dimacs(&f);
            let again = sparsemc::formula::parse_dimacs(&rendered)
                .expect("rendered output must reparse");
            assert_eq!(f.num_vars(), again.num_vars());
            assert_eq!(f.cnf.clauses().len(), again.cnf.clauses().len());
            assert_eq!(f.xors().len(), again.xors().len());
            assert_eq!(f.projection(), again.projection());
        }
    }
});
