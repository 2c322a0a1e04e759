# models subpackage
