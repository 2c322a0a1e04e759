# io subpackage
