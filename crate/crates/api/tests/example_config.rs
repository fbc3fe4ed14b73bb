use std::path::Path;

use frmp_api::Config;

#[test]
fn shipped_example_config_loads() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/frmp.toml");
    let config = Config::load(&path).unwrap();
    assert_eq!(config.users.len(), 2);
    assert_eq!(config.profiles().len(), 2);
    let catalog = config.catalog().unwrap().expect("catalog_path is set");
    assert_eq!(catalog, frmp_core::Catalog::default());
    assert!(catalog.blocks_traffic("Landslide"));
    assert!(!catalog.blocks_traffic("Erosion"));
}
