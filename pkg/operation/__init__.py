# operation package

