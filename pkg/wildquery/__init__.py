# WildQuery wildcard query engine
