# training subpackage
