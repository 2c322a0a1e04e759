# explainability subpackage
