# Matrix package
