use ottrkit::syntax::{parse_instances, parse_library, serialize_instances, serialize_library};
use ottrkit_testkit::{GenConfig, gen_prefixes, random_case};
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

const LIBRARIES: [&str; 6] =
    ["pizza.stottr", "axioms.stottr", "axiom_scatter.stottr", "cycle.stottr", "people.stottr", "materials.stottr"];

const INSTANCE_FILES: [(&str, &str); 4] = [
    ("pizza.stottr", "pizza_instances.stottr"),
    ("axioms.stottr", "axioms_instances.stottr"),
    ("people.stottr", "people_shared.stottr"),
    ("people.stottr", "people_disjoint.stottr"),
];

#[test]
fn corpus_libraries_round_trip() {
    for name in LIBRARIES {
        let lib = parse_library(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        let text = serialize_library(&lib);
        assert_eq!(parse_library(&text).unwrap(), lib, "{name}");
        assert_eq!(serialize_library(&parse_library(&text).unwrap()), text, "{name}");
    }
}

#[test]
fn corpus_instances_round_trip() {
    for (lib, insts) in INSTANCE_FILES {
        let lib = parse_library(&fixture(lib)).unwrap();
        let parsed = parse_instances(&fixture(insts), &lib).unwrap();
        let text = serialize_instances(&parsed, &lib.effective_prefixes());
        assert_eq!(parse_instances(&text, &lib).unwrap(), parsed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generated_libraries_round_trip(seed in any::<u64>()) {
        let (lib, insts) = random_case(seed, &GenConfig::default());
        let text = serialize_library(&lib);
        let reparsed = parse_library(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(&reparsed, &lib);

        let itext = serialize_instances(&insts, &gen_prefixes());
        let iparsed = parse_instances(&itext, &lib).map_err(|e| TestCaseError::fail(format!("{e:?}\n{itext}")))?;
        prop_assert_eq!(iparsed, insts);
    }

    #[test]
    fn parser_never_panics(text in "[\\[\\]()<>{}?!:.,=|+ a-z\"@#_^0-9\n]{0,80}") {
        let _ = parse_library(&text);
        let _ = parse_instances(&text, &ottrkit::Library::default());
    }
}
