# Tests for Local Brain








