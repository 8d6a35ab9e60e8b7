use std::path::Path;

use proptest::prelude::*;

use sore::config::PipelineConfig;

proptest! {
    #[test]
    fn text_form_round_trips(
        k in 1usize..200,
        beam in 0.05f64..1.0,
        width in 1usize..30,
        seed in any::<u64>(),
        threshold in proptest::option::of(-1.0f64..1.0),
        sections in proptest::sample::subsequence(vec!["abstract", "introduction", "results", "discussion", "conclusion", "other"], 1..6),
        source in prop_oneof![Just("rbs"), Just("external"), Just("both")],
    ) {
        let mut text = format!(
            "corpus = c\noutput_dir = o\nvectors = v.txt\nexternal_predictions = p.jsonl\nk = {k}\nbeam_ratio = {beam}\n\
max_span_width = {width}\nseed = {seed}\nsections = {}\ntradeoff_source = {source}\n",
            sections.join(", ")
        );
        if let Some(t) = threshold {
            text.push_str(&format!("cosine_threshold = {t}\n"));
        }
        let c = PipelineConfig::parse(&text, Path::new("/base"), []).unwrap();
        let once = c.to_text();
        let parsed = PipelineConfig::parse(&once, Path::new("/other"), []).unwrap();
        prop_assert_eq!(&parsed, &c);
        prop_assert_eq!(parsed.to_text(), once);
    }
}
