# pipeline subpackage
